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

#include <deque>
#include <random>

#include "oidc2/flows.hpp"
#include "test_support.hpp"

namespace oidc2 {
namespace {

using testing::error_of;
using testing::FakeOp;

class FlowsTest : public ::testing::Test {
 protected:
  ManualClock clock;
  FakeOp op_a{"https://a.example"};
  FakeOp op_b{"https://b.example"};
  KeyLookup keys = testing::lookup_for({&op_a, &op_b});
  TrustPolicy policy;
  KeyPairDescriptor key_a = testing::client_key();
  KeyPairDescriptor key_b = testing::client_key();

  void SetUp() override {
    policy.set(op_a.issuer, testing::aop({"email"}));
    policy.set(op_b.issuer, testing::aop({"email"}));
  }
  std::string ict_a(ContextSet ctx = {"vc"}, std::int64_t v = 300) { return op_a.issue(key_a, ctx, clock, v, "alice"); }
  std::string ict_b(ContextSet ctx = {"vc"}, std::int64_t v = 300) { return op_b.issue(key_b, ctx, clock, v, "bob"); }
};

TEST_F(FlowsTest, VcMutualHandshake) {
  const auto a = ict_a(), b = ict_b();
  auto [hello, pending] = vc_initiate(key_a, a, "bob", clock);
  EXPECT_TRUE(key_a.public_part.verify(handshake_signing_input(hello.session_id, hello.ict), hello.signature));
  const auto resp = vc_respond(hello, key_b, b, policy, keys, clock);
  ASSERT_TRUE(resp.result.accepted) << resp.result.detail;
  ASSERT_TRUE(resp.reply);
  EXPECT_EQ(resp.reply->session_id, hello.session_id);
  EXPECT_EQ(resp.result.subject, "alice");
  const auto mutual = vc_complete(pending, *resp.reply, policy, keys, clock);
  ASSERT_TRUE(mutual.peer.accepted) << mutual.peer.detail;
  EXPECT_EQ(mutual.peer.subject, "bob");
  EXPECT_EQ(*mutual.own_channel_key, key_a.public_part);
  EXPECT_EQ(*mutual.peer_channel_key, key_b.public_part);

  // Completion does not re-check ICT expiry once the channel is up.
  clock.advance(3600);
  EXPECT_TRUE(mutual.peer.accepted);
}

TEST_F(FlowsTest, VcInitiatePreconditions) {
  EXPECT_EQ(error_of([&] { vc_initiate(key_a, ict_a({"email"}), "bob", clock); }), Errc::wrong_context);
  EXPECT_EQ(error_of([&] { vc_initiate(key_b, ict_a(), "bob", clock); }), Errc::key_ict_mismatch);
  const auto a = ict_a();
  EXPECT_NE(vc_initiate(key_a, a, "bob", clock).first.session_id, vc_initiate(key_a, a, "bob", clock).first.session_id);
}

TEST_F(FlowsTest, VcTamperRelayAndTrust) {
  const auto a = ict_a(), b = ict_b();
  auto [hello, pending] = vc_initiate(key_a, a, "bob", clock);
  auto altered = hello;
  altered.session_id.value += "x";
  const auto rejected = vc_respond(altered, key_b, b, policy, keys, clock);
  EXPECT_EQ(rejected.result.rejection_reason, Errc::bad_handshake_signature);
  EXPECT_FALSE(rejected.reply);

  const auto resp = vc_respond(hello, key_b, b, policy, keys, clock);
  auto [hello2, pending2] = vc_initiate(key_a, a, "bob", clock);
  (void)hello2;
  EXPECT_EQ(vc_complete(pending2, *resp.reply, policy, keys, clock).peer.rejection_reason, Errc::session_mismatch);

  TrustPolicy only_a;
  only_a.set(op_a.issuer, testing::aop({"email"}));
  EXPECT_EQ(vc_complete(pending, *resp.reply, only_a, keys, clock).peer.rejection_reason, Errc::untrusted_issuer);
  EXPECT_EQ(vc_respond(hello, key_b, b, TrustPolicy{}, keys, clock).result.rejection_reason, Errc::untrusted_issuer);
}

TEST_F(FlowsTest, PendingTable) {
  PendingHandshakes table;
  auto [hello, pending] = vc_initiate(key_a, ict_a(), "bob", clock);
  table.add(pending);
  EXPECT_EQ(table.size(), 1u);
  EXPECT_TRUE(table.take(hello.session_id));
  EXPECT_FALSE(table.take(hello.session_id));
}

// Several handshakes run concurrently through a relay that drops, duplicates
// and reorders messages. Every response is offered to every pending session;
// a session only ever completes with its own response.
TEST_F(FlowsTest, AntiRelayUnderReorderingChannel) {
  const auto a = ict_a(), b = ict_b();
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<PendingHandshake> pendings;
    std::deque<HandshakeMessage> to_responder;
    for (int i = 0; i < 4; ++i) {
      auto [msg, p] = vc_initiate(key_a, a, "bob", clock);
      pendings.push_back(p);
      to_responder.push_back(msg);
      if (rng() % 3 == 0) to_responder.push_back(msg);  // duplicate
    }
    std::shuffle(to_responder.begin(), to_responder.end(), rng);
    std::vector<HandshakeMessage> responses;
    for (const auto& m : to_responder) {
      if (rng() % 5 == 0) continue;  // lost
      auto r = vc_respond(m, key_b, b, policy, keys, clock);
      ASSERT_TRUE(r.reply);
      responses.push_back(*r.reply);
    }
    std::shuffle(responses.begin(), responses.end(), rng);
    for (const auto& p : pendings) {
      for (const auto& r : responses) {
        const bool ok = vc_complete(p, r, policy, keys, clock).peer.accepted;
        EXPECT_EQ(ok, r.session_id == p.session_id);
      }
    }
  }
}

TEST_F(FlowsTest, ImChannelBinding) {
  const auto ict = op_a.issue(key_a, {"im"}, clock, 300);
  const auto t0 = clock.now();
  EXPECT_TRUE(im_bind_channel(key_a.public_part, ict, policy, keys, t0).accepted);
  EXPECT_EQ(im_bind_channel(key_b.public_part, ict, policy, keys, t0).rejection_reason, Errc::key_mismatch);
  EXPECT_EQ(im_bind_channel(key_a.public_part, ict, policy, keys, t0 + 301).rejection_reason,
            Errc::receipt_after_expiry);
  EXPECT_TRUE(im_bind_channel(key_a.public_part, ict, policy, keys, t0 + 300).accepted);
  EXPECT_EQ(im_bind_channel(key_a.public_part, ict_a({"vc"}), policy, keys, t0).rejection_reason,
            Errc::context_mismatch);
  // Late re-verification is fine as long as the receipt time is inside the window.
  clock.advance(86400);
  EXPECT_TRUE(im_bind_channel(key_a.public_part, ict, policy, keys, t0 + 10).accepted);
}

class EmailTest : public FlowsTest {
 protected:
  SignedMessage sign(const KeyPairDescriptor& key, const std::string& ict) {
    return email_sign(to_bytes("Hi Bob"), {to_bytes("attachment-1"), to_bytes("attachment-2")}, key, ict, clock);
  }
};

TEST_F(EmailTest, RoundTripAndInboxTime) {
  const auto ict = ict_a({"email"}, 3600);
  const auto msg = sign(key_a, ict);
  const auto sent = clock.now();
  EXPECT_TRUE(email_verify(msg, policy, keys, sent + 600, true, clock).accepted);
  ManualClock two_days_later(sent + 48 * 3600);
  EXPECT_TRUE(email_verify(msg, policy, keys, sent + 600, true, two_days_later).accepted);
  EXPECT_EQ(email_verify(msg, policy, keys, sent + 600, false, two_days_later).rejection_reason, Errc::ict_expired);
  EXPECT_EQ(email_verify(msg, policy, keys, sent + 3601, true, two_days_later).rejection_reason, Errc::ict_expired);
  EXPECT_TRUE(email_verify(SignedMessage::from_json(msg.to_json()), policy, keys, sent + 600, true, clock).accepted);
}

TEST_F(EmailTest, SignPreconditions) {
  EXPECT_EQ(error_of([&] { sign(key_a, ict_a({"vc"})); }), Errc::wrong_context);
  EXPECT_EQ(error_of([&] { sign(key_b, ict_a({"email"})); }), Errc::key_ict_mismatch);
}

TEST_F(EmailTest, Mutations) {
  const auto msg = sign(key_a, ict_a({"email"}, 3600));
  const auto inbox = clock.now() + 60;
  auto check = [&](const SignedMessage& m) { return email_verify(m, policy, keys, inbox, true, clock); };

  auto replaced = msg;
  replaced.ict = ict_a({"email"}, 3600);
  EXPECT_EQ(check(replaced).rejection_reason, Errc::bad_signature);
  auto retimed = msg;
  retimed.sent_at += 1;
  EXPECT_FALSE(check(retimed).accepted);
  auto dropped = msg;
  dropped.attachments.pop_back();
  EXPECT_FALSE(check(dropped).accepted);

  std::mt19937 rng(8);
  for (int i = 0; i < 200; ++i) {
    auto m = msg;
    const auto which = rng() % 4;
    Bytes* field = which == 0 ? &m.body : which == 1 ? &m.attachments[0] : which == 2 ? &m.attachments[1] : &m.signature;
    (*field)[rng() % field->size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    EXPECT_FALSE(check(m).accepted) << "field " << which;
  }
}

TEST_F(EmailTest, EncodingIsUnambiguous) {
  EXPECT_NE(signed_message_encoding(to_bytes("ab"), {to_bytes("c")}, 1, "x"),
            signed_message_encoding(to_bytes("a"), {to_bytes("bc")}, 1, "x"));
  EXPECT_NE(signed_message_encoding(to_bytes("a"), {to_bytes("")}, 1, "x"),
            signed_message_encoding(to_bytes("a"), {}, 1, "x"));
}

TEST_F(EmailTest, LongTermKeyRevocation) {
  const auto lt = testing::client_key(KeyKind::long_term, "https://rev.example");
  const auto msg = email_sign(to_bytes("contract"), {}, lt, op_a.issue(lt, {"email"}, clock, 3600), clock);
  ManualClock much_later(clock.now() + 48 * 3600);
  std::set<std::string> revoked;
  bool reachable = true;
  VerifyOptions options;
  options.revocation = [&](const std::string& server, const std::string& thumb) {
    EXPECT_EQ(server, "https://rev.example");
    if (!reachable) throw Error(Errc::revocation_unreachable, "down");
    return revoked.count(thumb) ? RevocationStatus::revoked : RevocationStatus::good;
  };
  EXPECT_TRUE(email_verify(msg, policy, keys, 0, false, much_later, options).accepted);
  revoked.insert(lt.public_part.thumbprint());
  EXPECT_EQ(email_verify(msg, policy, keys, 0, false, much_later, options).rejection_reason, Errc::key_revoked);
  reachable = false;
  EXPECT_EQ(email_verify(msg, policy, keys, 0, false, much_later, options).rejection_reason,
            Errc::revocation_unreachable);
}

TEST(FlowsWire, HandshakeJsonRoundTrip) {
  HandshakeMessage m{"a.b.c", SessionId{"x|y|1|ff"}, {1, 2, 3}};
  const auto again = HandshakeMessage::from_json(m.to_json());
  EXPECT_EQ(again.ict, m.ict);
  EXPECT_EQ(again.session_id, m.session_id);
  EXPECT_EQ(again.signature, m.signature);
  EXPECT_EQ(recommended_validity("email"), 3600);
  EXPECT_EQ(recommended_validity("vc"), 300);
}

}  // namespace
}  // namespace oidc2
