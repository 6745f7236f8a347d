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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "oidc2/clock.hpp"
#include "oidc2/op_stub.hpp"
#include "oidc2/pop.hpp"
#include "oidc2/token.hpp"

namespace oidc2 {

/// OAuth scope prefix that authorizes ICT issuance for one context.
inline constexpr std::string_view kE2eScopePrefix = "e2e_auth_";

struct IctRequest {
  std::string access_token;
  Json public_key;
  ProofOfPossession pop;
  ContextSet contexts;
  std::optional<std::int64_t> requested_validity;
  KeyKind key_kind = KeyKind::ephemeral;
  std::optional<std::string> revocation_server;

  /// Request body as sent to POST /ict (the access token travels in the
  /// Authorization header, not here).
  Json body_json() const;
  /// Throws Error(invalid_request) or Error(malformed_pop).
  static IctRequest from_json(const Json& body, std::string access_token);
};

struct IssuerConfig {
  std::string issuer_url;
  KeyPairDescriptor op_signing_key;
  std::string key_id;
  std::string userinfo_url;
  std::map<std::string, std::int64_t> allowed_contexts{{"vc", 300}, {"im", 300}, {"email", 3600}};
  std::int64_t default_validity_seconds = 300;
  std::int64_t max_skew_seconds = kDefaultMaxSkewSeconds;
  std::int64_t nonce_ttl_seconds = kDefaultNonceTtlSeconds;

  /// Throws std::invalid_argument if a context cap exceeds 3600 s or the
  /// default validity exceeds the smallest cap.
  void validate() const;

  /// Loads the JSON config file. "signing_key_path" is resolved relative to
  /// the file's directory; "key_id" defaults to the key's JWK thumbprint.
  static IssuerConfig load(const std::string& path);
  static IssuerConfig from_json(const Json& j, const std::string& base_dir = ".");
};

/// Environment variable naming the issuer config file.
inline constexpr const char* kIssuerConfigEnv = "OIDC2_ISSUER_CONFIG";

/// Grants all requested contexts or none. Requires an identity scope
/// (profile, email, phone or address) and e2e_auth_<ctx> for every context.
ContextSet check_e2e_scope(const ScopeSet& token_scopes, const ContextSet& requested_contexts);

/// Reads the scope claim of a JWT access token without verifying it; the
/// token's validity is established by the userinfo call that follows.
/// Throws Error(invalid_token) if the token is not a JWT with a scope claim.
ScopeSet access_token_scopes(std::string_view access_token);

/// GET userinfo with the bearer token. Errors: invalid_token on 401/403,
/// upstream_unavailable on transport failure or 5xx, and
/// malformed_upstream_response when the body lacks "sub".
Json fetch_userinfo(const std::string& access_token, const std::string& userinfo_url);

using UserinfoFetcher = std::function<Json(const std::string& access_token)>;

/// Processes one ICT Request: scope check, userinfo fetch, PoP check, claim
/// assembly, signing. Throws Error with the protocol code on rejection.
CompactToken handle_ict_request(const IctRequest& request, const IssuerConfig& config, NonceCache& cache,
                                const Clock& clock, const UserinfoFetcher& fetch_userinfo);

/// HTTP status for an /ict error code.
int http_status_for(Errc code);

/// POST /ict and GET /health on a background thread (or the calling thread
/// via run()).
class IssuerServer {
 public:
  IssuerServer(IssuerConfig config, const Clock& clock);
  /// Uses a custom userinfo fetcher instead of HTTP.
  IssuerServer(IssuerConfig config, const Clock& clock, UserinfoFetcher fetcher);
  ~IssuerServer();
  IssuerServer(const IssuerServer&) = delete;
  IssuerServer& operator=(const IssuerServer&) = delete;

  int start(const std::string& host = "127.0.0.1", int port = 0);
  void run(const std::string& host, int port);
  void stop();
  int port() const;

  NonceCache& nonce_cache();
  int peak_inflight() const;
  void reset_peak_inflight();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace oidc2
