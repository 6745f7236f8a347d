// Copyright 2026 The oidc2 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>

#include "oidc2/op_stub.hpp"
#include "oidc2/verifier.hpp"
#include "test_support.hpp"

namespace oidc2 {
namespace {

using testing::aop;
using testing::FakeOp;
using testing::lookup_for;

VerifyOptions no_revocation() {
  VerifyOptions o;
  o.revocation = [](const std::string&, const std::string&) -> RevocationStatus {
    throw Error(Errc::revocation_unreachable, "not expected in this test");
  };
  return o;
}

class VerifierTest : public ::testing::Test {
 protected:
  ManualClock clock;
  FakeOp op{"https://mail.example"};
  FakeOp bank{"https://bank.example"};
  KeyPairDescriptor client = testing::client_key();
  KeyLookup keys = lookup_for({&op, &bank});
  TrustPolicy policy;

  void SetUp() override {
    policy.set(op.issuer, aop({"email"}));
    policy.set(bank.issuer, TrustEntry{OpClass::verifying, {"bank_account"}, {"name"}, 3});
  }
};

TEST_F(VerifierTest, ClassifyOp) {
  EXPECT_EQ(classify_op(op.issuer, policy).authoritative_claims, (std::set<std::string>{"email", "sub"}));
  EXPECT_EQ(classify_op("https://unknown.example", policy).klass, OpClass::insecure);
  const auto b = classify_op(bank.issuer, policy);
  EXPECT_EQ(b.verified_claims, std::set<std::string>{"name"});
  EXPECT_EQ(b.authoritative_claims, (std::set<std::string>{"bank_account", "sub"}));
  const TrustEntry insecure{OpClass::insecure, {"email"}, {"name"}, 0};
  EXPECT_TRUE(insecure.normalized().authoritative_claims.empty());
}

TEST_F(VerifierTest, AopEmailProvenance) {
  const auto r = verify_ict(op.issue(client, {"email"}, clock), keys, policy, "email", clock);
  ASSERT_TRUE(r.accepted) << r.detail;
  EXPECT_EQ(r.subject, "alice-sub-1");
  EXPECT_EQ(r.claims.at("email").provenance, Provenance::authoritative);
  EXPECT_EQ(r.claims.at("name").provenance, Provenance::uncertified);
  EXPECT_EQ(r.claims.at("sub").provenance, Provenance::authoritative);
  EXPECT_EQ(r.confirmation_key, client.public_part.jwk());
  EXPECT_EQ(r.rank, 1);
}

TEST_F(VerifierTest, BankExample) {
  const auto ict = bank.issue(client, {"email"}, clock, 300, "alice-at-bank",
                              Json{{"name", "Alice Example"}, {"bank_account", "DE89 3704"}, {"email", "a@x"}});
  const auto r = verify_ict(ict, keys, policy, "email", clock);
  ASSERT_TRUE(r.accepted) << r.detail;
  EXPECT_EQ(r.claims.at("name").provenance, Provenance::verified);
  EXPECT_EQ(r.claims.at("bank_account").provenance, Provenance::authoritative);
  EXPECT_EQ(r.claims.at("email").provenance, Provenance::uncertified);
}

TEST_F(VerifierTest, Rejections) {
  const auto ict = op.issue(client, {"email"}, clock);
  EXPECT_EQ(verify_ict(ict, keys, policy, "vc", clock).rejection_reason, Errc::context_mismatch);
  EXPECT_EQ(verify_ict(ict, keys, TrustPolicy{}, "email", clock).rejection_reason, Errc::untrusted_issuer);
  TrustPolicy insecure;
  insecure.set(op.issuer, TrustEntry{});
  EXPECT_EQ(verify_ict(ict, keys, insecure, "email", clock).rejection_reason, Errc::untrusted_issuer);
  EXPECT_EQ(verify_ict(ict, lookup_for({&bank}), policy, "email", clock).rejection_reason, Errc::unknown_key_id);
  EXPECT_EQ(verify_ict("not a token", keys, policy, "email", clock).rejection_reason, Errc::malformed_token);

  FakeOp impostor{op.issuer};
  impostor.kid = op.kid;
  EXPECT_EQ(verify_ict(impostor.issue(client, {"email"}, clock), keys, policy, "email", clock).rejection_reason,
            Errc::signature_invalid);

  ManualClock later(clock.now() + 301);
  EXPECT_EQ(verify_ict(ict, keys, policy, "email", later).rejection_reason, Errc::token_expired);
}

TEST_F(VerifierTest, InteractivePrompt) {
  const auto ict = op.issue(client, {"email"}, clock);
  VerifyOptions yes;
  std::string asked;
  yes.on_unknown_issuer = [&](const std::string& iss, const IctClaims&) {
    asked = iss;
    return true;
  };
  const auto r = verify_ict(ict, keys, TrustPolicy{}, "email", clock, yes);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(asked, op.issuer);
  EXPECT_EQ(r.claims.at("sub").provenance, Provenance::authoritative);
  EXPECT_EQ(r.claims.at("email").provenance, Provenance::uncertified);

  VerifyOptions no;
  no.on_unknown_issuer = [](const std::string&, const IctClaims&) { return false; };
  EXPECT_EQ(verify_ict(ict, keys, TrustPolicy{}, "email", clock, no).rejection_reason, Errc::untrusted_issuer);
}

// Raising an issuer's class or enlarging its claim sets never turns an
// acceptance into a rejection, and never lowers a claim's provenance.
TEST_F(VerifierTest, MonotonicityAndNoInflation) {
  const auto ict = op.issue(client, {"email"}, clock, 300, "s",
                            Json{{"name", "n"}, {"email", "e"}, {"phone_number", "p"}, {"address", "a"}});
  const std::vector<std::string> names{"name", "email", "phone_number", "address"};
  std::mt19937 rng(99);
  auto random_subset = [&] {
    std::set<std::string> s;
    for (const auto& n : names) {
      if (rng() % 2) s.insert(n);
    }
    return s;
  };
  const auto rank = [](Provenance p) { return p == Provenance::authoritative ? 2 : p == Provenance::verified ? 1 : 0; };
  for (int trial = 0; trial < 50; ++trial) {
    TrustEntry base{rng() % 2 ? OpClass::authoritative : OpClass::verifying, random_subset(), random_subset(), 1};
    TrustEntry bigger = base;
    for (const auto& n : random_subset()) bigger.authoritative_claims.insert(n);
    for (const auto& n : random_subset()) bigger.verified_claims.insert(n);
    TrustPolicy p1, p2;
    p1.set(op.issuer, base);
    p2.set(op.issuer, bigger);
    const auto r1 = verify_ict(ict, keys, p1, "email", clock);
    const auto r2 = verify_ict(ict, keys, p2, "email", clock);
    ASSERT_TRUE(r1.accepted);
    ASSERT_TRUE(r2.accepted);
    const auto norm = base.normalized();
    for (const auto& [name, claim] : r1.claims) {
      EXPECT_GE(rank(r2.claims.at(name).provenance), rank(claim.provenance));
      if (claim.provenance == Provenance::authoritative) EXPECT_TRUE(norm.authoritative_claims.count(name));
      if (claim.provenance == Provenance::verified) EXPECT_TRUE(norm.verified_claims.count(name));
    }
  }
}

TEST_F(VerifierTest, MultiIctSelection) {
  FakeOp shady{"https://shady.example"};
  FakeOp other{"https://other.example"};
  const auto all_keys = lookup_for({&op, &bank, &shady, &other});
  policy.set(op.issuer, aop({"email"}, 5));
  policy.set(other.issuer, aop({"email"}, 5));

  const std::vector<std::string> pair{shady.issue(client, {"email"}, clock), op.issue(client, {"email"}, clock)};
  auto sel = select_from_multiple(pair, all_keys, policy, "email", clock);
  EXPECT_TRUE(sel.result.accepted);
  EXPECT_EQ(sel.chosen_index, 1u);
  EXPECT_EQ(sel.per_token[0].rejection_reason, Errc::untrusted_issuer);

  const std::vector<std::string> insecure{shady.issue(client, {"email"}, clock), shady.issue(client, {"email"}, clock)};
  sel = select_from_multiple(insecure, all_keys, policy, "email", clock);
  EXPECT_EQ(sel.result.rejection_reason, Errc::all_rejected);
  EXPECT_FALSE(sel.chosen_index);

  // Equal rank: the one with less remaining validity wins, in both orders.
  const auto short_lived = other.issue(client, {"email"}, clock, 100);
  const auto long_lived = op.issue(client, {"email"}, clock, 200);
  for (const auto& tokens : {std::vector{short_lived, long_lived}, std::vector{long_lived, short_lived}}) {
    sel = select_from_multiple(tokens, all_keys, policy, "email", clock);
    ASSERT_TRUE(sel.chosen_index);
    EXPECT_EQ(tokens[*sel.chosen_index], short_lived);
  }

  const auto stranger = testing::client_key();
  const std::vector<std::string> mixed{op.issue(client, {"email"}, clock), other.issue(stranger, {"email"}, clock)};
  EXPECT_EQ(select_from_multiple(mixed, all_keys, policy, "email", clock).result.rejection_reason, Errc::key_mismatch);
  EXPECT_EQ(select_from_multiple(pair, all_keys, policy, "email", clock, stranger.public_part).result.rejection_reason,
            Errc::key_mismatch);
}

TEST_F(VerifierTest, SelectionIsPermutationInvariant) {
  std::vector<FakeOp> ops;
  for (int i = 0; i < 6; ++i) ops.emplace_back("https://op" + std::to_string(i) + ".example");
  std::vector<const FakeOp*> ptrs;
  for (const auto& o : ops) ptrs.push_back(&o);
  std::map<std::pair<std::string, std::string>, PublicKey> key_map;
  for (const auto* o : ptrs) key_map.emplace(std::pair{o->issuer, o->kid}, o->key.public_part);
  const auto all_keys = static_key_lookup(key_map);
  TrustPolicy p;
  const int ranks[] = {1, 4, 4, 2, 4, 0};
  for (int i = 0; i < 5; ++i) p.set(ops[i].issuer, aop({"email"}, ranks[i]));  // op5 stays insecure
  std::vector<std::string> tokens;
  const std::int64_t validities[] = {100, 300, 300, 50, 300, 10};
  for (int i = 0; i < 6; ++i) tokens.push_back(ops[i].issue(client, {"email"}, clock, validities[i]));
  tokens.push_back(ops[2].issue(client, {"email"}, clock, 300));  // exact tie with tokens[2]

  const auto reference = select_from_multiple(tokens, all_keys, p, "email", clock);
  ASSERT_TRUE(reference.chosen_index);
  const auto chosen = tokens[*reference.chosen_index];
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto sel = select_from_multiple(shuffled, all_keys, p, "email", clock);
    ASSERT_TRUE(sel.chosen_index);
    EXPECT_EQ(shuffled[*sel.chosen_index], chosen);
  }
  EXPECT_EQ(reference.result.rank, 4);
}

TEST_F(VerifierTest, RevocationServer) {
  RevocationListServer rev;
  rev.start();
  const auto lt = testing::client_key(KeyKind::long_term, rev.url());
  const auto thumb = lt.public_part.thumbprint();
  EXPECT_EQ(check_revocation(rev.url(), thumb), RevocationStatus::good);
  const auto ict = op.issue(lt, {"email"}, clock);
  EXPECT_TRUE(verify_ict(ict, keys, policy, "email", clock).accepted);
  rev.revoke(thumb);
  EXPECT_EQ(check_revocation(rev.url(), thumb), RevocationStatus::revoked);
  EXPECT_EQ(verify_ict(ict, keys, policy, "email", clock).rejection_reason, Errc::key_revoked);

  const auto url = rev.url();
  rev.stop();
  EXPECT_THROW(check_revocation(url, thumb), Error);
  const auto closed = testing::client_key(KeyKind::long_term, url);
  EXPECT_EQ(verify_ict(op.issue(closed, {"email"}, clock), keys, policy, "email", clock).rejection_reason,
            Errc::revocation_unreachable);

  // Ephemeral keys are never checked.
  EXPECT_TRUE(verify_ict(op.issue(client, {"email"}, clock), keys, policy, "email", clock, no_revocation()).accepted);
}

TEST_F(VerifierTest, PolicyJsonRoundTrip) {
  const auto again = TrustPolicy::from_json(policy.to_json());
  EXPECT_EQ(again.entries(), policy.entries());
  EXPECT_ANY_THROW(TrustPolicy::from_json(Json{{"issuers", {{{"iss", "x"}, {"class", "bogus"}}}}}));
}

TEST(JwksCache, CachesForTtl) {
  ManualClock clock;
  FakeOp op{"https://op.example"};
  int calls = 0;
  JwksKeyCache cache(clock, 300, [&](const std::string& url) -> std::optional<Json> {
    ++calls;
    EXPECT_EQ(url, "https://op.example/.well-known/jwks.json");
    Json jwk = op.key.public_part.jwk();
    jwk["kid"] = op.kid;
    return Json{{"keys", {jwk}}};
  });
  EXPECT_TRUE(cache.lookup(op.issuer, op.kid));
  EXPECT_TRUE(cache.lookup(op.issuer, op.kid));
  EXPECT_EQ(calls, 1);
  EXPECT_FALSE(cache.lookup(op.issuer, "unknown"));
  clock.advance(301);
  EXPECT_TRUE(cache.lookup(op.issuer, op.kid));
  EXPECT_GE(calls, 2);
}

}  // namespace
}  // namespace oidc2
