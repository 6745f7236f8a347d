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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "oidc2/clock.hpp"
#include "oidc2/token.hpp"

namespace oidc2 {

using ScopeSet = std::set<std::string>;

/// Parses a space-separated OAuth scope string.
ScopeSet parse_scopes(std::string_view text);
std::string join_scopes(const ScopeSet& scopes);

struct StubUser {
  std::string username;
  std::string password;
  std::string sub;
  Json claims = Json::object();
  ScopeSet granted_scopes;
};

/// Loads {"users": [{username, password, sub, claims, granted_scopes}]}.
/// Throws std::invalid_argument on duplicate usernames or subs.
std::vector<StubUser> load_stub_users(const Json& fixture);
std::vector<StubUser> load_stub_users_file(const std::string& path);

struct IssuedTokenRecord {
  std::string access_token;
  std::string refresh_token;
  std::string sub;
  ScopeSet scopes;
  UnixTime expires_at = 0;
};

struct TokenResponse {
  std::string access_token;
  std::string refresh_token;
  std::string id_token;
  std::string token_type = "Bearer";
  std::int64_t expires_in = 0;

  Json to_json() const;
  static TokenResponse from_json(const Json& j);
};

/// Minimal in-memory OpenID Provider: password and refresh-token grants,
/// userinfo and JWKS. Access tokens are JWTs (typ at+jwt) carrying the
/// granted scope so resource servers can read it; their validity is still
/// decided by the token table.
class OpStub {
 public:
  static constexpr std::int64_t kAccessTokenLifetime = 300;

  OpStub(std::string issuer_url, std::vector<StubUser> users, KeyPairDescriptor signing_key, const Clock& clock);

  const std::string& issuer() const noexcept { return issuer_; }
  /// Only valid before the stub serves its first request.
  void set_issuer(std::string issuer_url) { issuer_ = std::move(issuer_url); }
  const std::string& key_id() const noexcept { return key_id_; }
  const KeyPairDescriptor& signing_key() const noexcept { return signing_key_; }

  /// Throws Error(bad_credentials) or Error(scope_not_granted).
  TokenResponse issue_tokens(std::string_view username, std::string_view password, const ScopeSet& scopes);

  /// Rotates the refresh token. Throws Error(invalid_refresh_token); of two
  /// concurrent refreshes with one token, exactly one succeeds.
  TokenResponse refresh(std::string_view refresh_token);

  /// {sub} plus the claims released by the token's scopes. Throws
  /// Error(invalid_token) for unknown or expired access tokens.
  Json handle_userinfo(std::string_view access_token) const;

  /// {"keys": [public JWK with kid, alg, use]}.
  Json serve_jwks() const;

  Json snapshot() const;
  void restore(const Json& snapshot);
  void save_snapshot(const std::string& path) const;
  void load_snapshot(const std::string& path);

 private:
  TokenResponse mint(const StubUser& user, const ScopeSet& scopes);
  const StubUser* find_user_by_sub(const std::string& sub) const;

  std::string issuer_;
  std::vector<StubUser> users_;
  KeyPairDescriptor signing_key_;
  std::string key_id_;
  const Clock& clock_;

  mutable std::mutex mu_;
  std::unordered_map<std::string, IssuedTokenRecord> access_tokens_;
  std::unordered_map<std::string, IssuedTokenRecord> refresh_tokens_;
  std::size_t issued_since_purge_ = 0;
};

/// Releases claims by scope: "profile" releases every stored claim, "email"
/// releases email and email_verified, "phone" releases phone_number and
/// phone_number_verified.
Json filter_claims_by_scope(const Json& claims, const ScopeSet& scopes);

/// HTTP front end for OpStub: POST /token, GET /userinfo,
/// GET /.well-known/jwks.json, GET /health.
class OpStubServer {
 public:
  explicit OpStubServer(OpStub& stub);
  ~OpStubServer();
  OpStubServer(const OpStubServer&) = delete;
  OpStubServer& operator=(const OpStubServer&) = delete;

  /// Binds (port 0 = ephemeral) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Two-step variant of start() for callers that need the port first.
  int bind(const std::string& host = "127.0.0.1", int port = 0);
  void listen_in_background();
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const;

  /// Highest number of /token requests observed in flight at once.
  int token_peak_inflight() const;
  void reset_peak_inflight();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serves GET /revoked as a JSON array of key thumbprints.
class RevocationListServer {
 public:
  RevocationListServer();
  ~RevocationListServer();
  RevocationListServer(const RevocationListServer&) = delete;
  RevocationListServer& operator=(const RevocationListServer&) = delete;

  void revoke(const std::string& thumbprint);
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace oidc2
