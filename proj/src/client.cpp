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

#include "oidc2/client.hpp"

#include <httplib.h>

#include "oidc2/error.hpp"
#include "oidc2/http_util.hpp"
#include "oidc2/pop.hpp"

namespace oidc2 {
namespace {

[[noreturn]] void rethrow_remote(const HttpResponse& res, Errc fallback) {
  const auto body = Json::parse(res.body, nullptr, false);
  if (body.is_object() && body.contains("error") && body["error"].is_string()) {
    const auto detail = body.value("detail", std::string());
    try {
      throw Error(errc_from_string(body["error"].get<std::string>()), detail);
    } catch (const std::invalid_argument&) {
      throw Error(fallback, body["error"].get<std::string>() + ": " + detail);
    }
  }
  throw Error(fallback, "HTTP " + std::to_string(res.status));
}

TokenResponse token_call(const std::string& op_url, const httplib::Params& params) {
  const auto res = http_post(join_url(op_url, "/token"), httplib::detail::params_to_query_str(params),
                             "application/x-www-form-urlencoded");
  if (!res) throw Error(Errc::endpoint_unreachable, "cannot reach " + op_url);
  if (res->status != 200) rethrow_remote(*res, Errc::auth_setup_failed);
  return TokenResponse::from_json(Json::parse(res->body));
}

}  // namespace

TokenResponse password_grant(const std::string& op_url, const std::string& username, const std::string& password,
                             const ScopeSet& scopes) {
  return token_call(op_url, {{"grant_type", "password"},
                             {"username", username},
                             {"password", password},
                             {"scope", join_scopes(scopes)}});
}

TokenResponse refresh_grant(const std::string& op_url, const std::string& refresh_token) {
  return token_call(op_url, {{"grant_type", "refresh_token"}, {"refresh_token", refresh_token}});
}

IctRequest make_ict_request(const KeyPairDescriptor& client_key, ContextSet contexts, const Clock& clock,
                            std::optional<std::int64_t> validity) {
  IctRequest r;
  r.public_key = client_key.public_part.jwk();
  r.pop = create_pop(client_key, clock);
  r.contexts = std::move(contexts);
  r.requested_validity = validity;
  r.key_kind = client_key.kind;
  r.revocation_server = client_key.revocation_server;
  return r;
}

std::string request_ict(const std::string& issuer_url, const std::string& access_token, const IctRequest& request) {
  const auto res = http_post(join_url(issuer_url, "/ict"), request.body_json().dump(), "application/json",
                             access_token);
  if (!res) throw Error(Errc::endpoint_unreachable, "cannot reach " + issuer_url);
  if (res->status != 200) rethrow_remote(*res, Errc::invalid_request);
  const auto body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("ict") || !body["ict"].is_string()) {
    throw Error(Errc::malformed_upstream_response, "issuer response has no ict");
  }
  return body["ict"].get<std::string>();
}

std::string obtain_ict(const std::string& op_url, const std::string& issuer_url, const std::string& username,
                       const std::string& password, const KeyPairDescriptor& client_key, ContextSet contexts,
                       const Clock& clock, std::optional<std::int64_t> validity) {
  ScopeSet scopes{"openid", "profile"};
  for (const auto& c : contexts) scopes.insert(std::string(kE2eScopePrefix) + c);
  const auto tokens = password_grant(op_url, username, password, scopes);
  return request_ict(issuer_url, tokens.access_token, make_ict_request(client_key, std::move(contexts), clock, validity));
}

}  // namespace oidc2
