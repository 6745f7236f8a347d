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

#include <thread>

#include "oidc2/client.hpp"
#include "oidc2/http_util.hpp"
#include "oidc2/local_stack.hpp"
#include "oidc2/op_stub.hpp"
#include "test_support.hpp"

namespace oidc2 {
namespace {

using testing::error_of;

class OpStubTest : public ::testing::Test {
 protected:
  ManualClock clock;
  KeyPairDescriptor key = generate_signing_keypair(SignatureAlgorithm::rs256, KeyKind::ephemeral);
  OpStub stub{"https://op.example", default_stub_users(), key, clock};
};

TEST_F(OpStubTest, IssueTokens) {
  const auto t = stub.issue_tokens("alice", "alice-password", {"profile", "e2e_auth_email"});
  EXPECT_FALSE(t.access_token.empty());
  EXPECT_FALSE(t.refresh_token.empty());
  EXPECT_EQ(t.expires_in, 300);
  const auto idt = CompactToken::parse(t.id_token);
  EXPECT_EQ(idt.type(), "JWT");
  EXPECT_TRUE(idt.signature_valid(key.public_part));
  EXPECT_EQ(idt.payload()["sub"], "alice-sub-1");
  EXPECT_EQ(idt.header()["kid"], stub.key_id());

  EXPECT_EQ(error_of([&] { stub.issue_tokens("alice", "wrong", {"profile"}); }), Errc::bad_credentials);
  EXPECT_EQ(error_of([&] { stub.issue_tokens("mallory", "x", {"profile"}); }), Errc::bad_credentials);
  EXPECT_EQ(error_of([&] { stub.issue_tokens("alice", "alice-password", {"admin"}); }), Errc::scope_not_granted);
}

TEST_F(OpStubTest, IdTokenRejectedAsIct) {
  const auto t = stub.issue_tokens("alice", "alice-password", {"openid", "profile"});
  EXPECT_EQ(error_of([&] { verify_token_signature(CompactToken::parse(t.id_token), key.public_part, clock); }),
            Errc::wrong_token_type);
}

TEST_F(OpStubTest, RefreshRotates) {
  const auto first = stub.issue_tokens("alice", "alice-password", {"profile", "offline_access"});
  const auto second = stub.refresh(first.refresh_token);
  EXPECT_NE(second.refresh_token, first.refresh_token);
  EXPECT_EQ(error_of([&] { stub.refresh(first.refresh_token); }), Errc::invalid_refresh_token);
  EXPECT_EQ(stub.handle_userinfo(second.access_token)["sub"], stub.handle_userinfo(first.access_token)["sub"]);
  EXPECT_EQ(CompactToken::parse(second.access_token).payload()["scope"], "offline_access profile");
}

TEST_F(OpStubTest, ConcurrentRefreshHasOneWinner) {
  const auto t = stub.issue_tokens("alice", "alice-password", {"profile"});
  std::atomic<int> winners{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      try {
        stub.refresh(t.refresh_token);
        ++winners;
      } catch (const Error&) {
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(winners.load(), 1);
}

TEST_F(OpStubTest, UserinfoLifetimeAndFiltering) {
  const auto t = stub.issue_tokens("alice", "alice-password", {"openid", "profile"});
  const auto info = stub.handle_userinfo(t.access_token);
  EXPECT_EQ(info["sub"], "alice-sub-1");
  EXPECT_EQ(info["name"], "Alice Example");
  EXPECT_EQ(info["email"], "alice@example.org");

  const auto bare = stub.issue_tokens("alice", "alice-password", {"openid", "e2e_auth_email"});
  EXPECT_EQ(stub.handle_userinfo(bare.access_token), Json({{"sub", "alice-sub-1"}}));

  const auto mail = stub.issue_tokens("alice", "alice-password", {"email"});
  const auto mail_info = stub.handle_userinfo(mail.access_token);
  EXPECT_TRUE(mail_info.contains("email"));
  EXPECT_FALSE(mail_info.contains("name"));

  clock.advance(300);
  EXPECT_NO_THROW(stub.handle_userinfo(t.access_token));
  clock.advance(1);
  EXPECT_EQ(error_of([&] { stub.handle_userinfo(t.access_token); }), Errc::invalid_token);
  EXPECT_EQ(error_of([&] { stub.handle_userinfo("garbage"); }), Errc::invalid_token);
}

TEST_F(OpStubTest, JwksHasNoPrivateMaterial) {
  const auto jwks = stub.serve_jwks();
  ASSERT_EQ(jwks["keys"].size(), 1u);
  EXPECT_EQ(jwks["keys"][0]["kid"], stub.key_id());
  for (const auto& k : jwks["keys"]) {
    EXPECT_FALSE(has_private_members(k));
    for (const char* field : {"d", "p", "q", "dp", "dq", "qi"}) EXPECT_FALSE(k.contains(field));
  }
}

TEST_F(OpStubTest, SnapshotRestore) {
  const auto t = stub.issue_tokens("alice", "alice-password", {"profile"});
  OpStub other{"https://op.example", default_stub_users(), key, clock};
  other.restore(stub.snapshot());
  EXPECT_EQ(other.handle_userinfo(t.access_token)["sub"], "alice-sub-1");
  EXPECT_NO_THROW(other.refresh(t.refresh_token));
}

TEST(StubUsers, RejectsDuplicates) {
  Json fixture = {{"users",
                   {{{"username", "a"}, {"password", "p"}, {"sub", "s1"}, {"scopes", {"openid"}}},
                    {{"username", "a"}, {"password", "p"}, {"sub", "s2"}, {"scopes", {"openid"}}}}}};
  EXPECT_ANY_THROW(load_stub_users(fixture));
  EXPECT_EQ(default_stub_users().size(), 3u);
}

TEST(StubServer, HttpEndpoints) {
  SystemClock clock;
  LocalStack stack(clock);
  const auto t = password_grant(stack.op_url(), "alice", "alice-password", {"openid", "profile", "offline_access"});
  const auto r = refresh_grant(stack.op_url(), t.refresh_token);
  EXPECT_EQ(error_of([&] { refresh_grant(stack.op_url(), t.refresh_token); }), Errc::invalid_refresh_token);
  EXPECT_EQ(error_of([&] { password_grant(stack.op_url(), "alice", "nope", {"openid"}); }), Errc::bad_credentials);
  const auto info = http_get(stack.op_url() + "/userinfo", r.access_token);
  ASSERT_TRUE(info);
  EXPECT_EQ(info->status, 200);
  EXPECT_EQ(Json::parse(info->body)["sub"], "alice-sub-1");
  const auto bad = http_get(stack.op_url() + "/userinfo", std::string("nope"));
  EXPECT_EQ(bad->status, 401);
  const auto jwks = http_get(stack.op_url() + "/.well-known/jwks.json");
  EXPECT_EQ(Json::parse(jwks->body)["keys"][0]["kid"], stack.stub().key_id());
}

}  // namespace
}  // namespace oidc2
