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

#include "oidc2/issuer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "background_server.hpp"
#include "oidc2/error.hpp"
#include "oidc2/http_util.hpp"

namespace oidc2 {
namespace {

const ScopeSet kIdentityScopes{"profile", "email", "phone", "address"};

[[noreturn]] void bad_request(const std::string& what) { throw Error(Errc::invalid_request, what); }

// Keep-alive connection per (thread, origin): the server's worker threads
// each reuse one upstream connection.
httplib::Client& upstream_client(const std::string& origin) {
  thread_local std::unordered_map<std::string, std::unique_ptr<httplib::Client>> clients;
  auto& slot = clients[origin];
  if (!slot) {
    slot = std::make_unique<httplib::Client>(origin);
    slot->set_keep_alive(true);
    slot->set_connection_timeout(std::chrono::seconds(5));
    slot->set_read_timeout(std::chrono::seconds(5));
  }
  return *slot;
}

}  // namespace

Json IctRequest::body_json() const {
  Json body{{"public_key", public_key},
            {"pop", pop.to_json()},
            {"contexts", contexts},
            {"key_kind", to_string(key_kind)}};
  if (requested_validity) body["validity"] = *requested_validity;
  if (revocation_server) body["rev_srv"] = *revocation_server;
  return body;
}

IctRequest IctRequest::from_json(const Json& body, std::string access_token) {
  if (!body.is_object()) bad_request("body must be a JSON object");
  IctRequest r;
  r.access_token = std::move(access_token);
  if (!body.contains("public_key") || !body["public_key"].is_object()) bad_request("public_key must be a JWK object");
  r.public_key = body["public_key"];
  if (!body.contains("pop")) throw Error(Errc::malformed_pop, "pop missing");
  r.pop = ProofOfPossession::from_json(body["pop"]);
  if (!body.contains("contexts") || !body["contexts"].is_array()) bad_request("contexts must be an array");
  for (const auto& c : body["contexts"]) {
    if (!c.is_string()) bad_request("contexts must be strings");
    r.contexts.insert(c.get<std::string>());
  }
  if (body.contains("validity")) {
    if (!body["validity"].is_number_integer()) bad_request("validity must be an integer");
    r.requested_validity = body["validity"].get<std::int64_t>();
  }
  if (body.contains("key_kind")) {
    if (!body["key_kind"].is_string()) bad_request("key_kind must be a string");
    r.key_kind = parse_key_kind(body["key_kind"].get<std::string>());
  }
  if (body.contains("rev_srv")) {
    if (!body["rev_srv"].is_string()) bad_request("rev_srv must be a string");
    r.revocation_server = body["rev_srv"].get<std::string>();
  }
  if (r.contexts.empty()) throw Error(Errc::empty_contexts, "at least one context is required");
  if ((r.key_kind == KeyKind::long_term) != r.revocation_server.has_value()) {
    bad_request("rev_srv is required for, and only for, long_term keys");
  }
  return r;
}

void IssuerConfig::validate() const {
  if (allowed_contexts.empty()) throw std::invalid_argument("allowed_contexts is empty");
  std::int64_t smallest = kMaxIctValiditySeconds;
  for (const auto& [ctx, max] : allowed_contexts) {
    if (max <= 0 || max > kMaxIctValiditySeconds) {
      throw std::invalid_argument("context " + ctx + " max validity must be in (0, 3600]");
    }
    smallest = std::min(smallest, max);
  }
  if (default_validity_seconds <= 0 || default_validity_seconds > smallest) {
    throw std::invalid_argument("default_validity must be in (0, " + std::to_string(smallest) + "]");
  }
  if (!op_signing_key.private_part) throw std::invalid_argument("op signing key has no private part");
}

IssuerConfig IssuerConfig::from_json(const Json& j, const std::string& base_dir) {
  namespace fs = std::filesystem;
  std::string pem;
  if (j.contains("signing_key_pem")) {
    pem = j["signing_key_pem"].get<std::string>();
  } else {
    fs::path key_path = j.at("signing_key_path").get<std::string>();
    if (key_path.is_relative()) key_path = fs::path(base_dir) / key_path;
    std::ifstream in(key_path);
    if (!in) throw std::runtime_error("cannot read signing key " + key_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    pem = ss.str();
  }

  IssuerConfig c{.issuer_url = j.at("issuer_url").get<std::string>(),
                 .op_signing_key = KeyPairDescriptor::from_private(PrivateKey::from_pem(pem)),
                 .key_id = {},
                 .userinfo_url = j.at("userinfo_url").get<std::string>()};
  c.key_id = j.value("key_id", c.op_signing_key.public_part.thumbprint());
  if (j.contains("allowed_contexts")) c.allowed_contexts = j["allowed_contexts"].get<std::map<std::string, std::int64_t>>();
  c.default_validity_seconds = j.value("default_validity", c.default_validity_seconds);
  c.max_skew_seconds = j.value("max_skew", c.max_skew_seconds);
  c.nonce_ttl_seconds = j.value("nonce_ttl", c.nonce_ttl_seconds);
  c.validate();
  return c;
}

IssuerConfig IssuerConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open issuer config " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  return from_json(Json::parse(in), dir.empty() ? "." : dir.string());
}

ContextSet check_e2e_scope(const ScopeSet& token_scopes, const ContextSet& requested_contexts) {
  std::vector<std::string> missing;
  const bool has_identity = std::any_of(kIdentityScopes.begin(), kIdentityScopes.end(),
                                        [&](const std::string& s) { return token_scopes.count(s) > 0; });
  if (!has_identity) missing.emplace_back("profile");
  for (const auto& ctx : requested_contexts) {
    auto scope = std::string(kE2eScopePrefix) + ctx;
    if (!token_scopes.count(scope)) missing.push_back(std::move(scope));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
    throw Error(Errc::insufficient_scope, "missing scopes: " + list);
  }
  return requested_contexts;
}

ScopeSet access_token_scopes(std::string_view access_token) {
  try {
    const auto token = CompactToken::parse(access_token);
    const auto it = token.payload().find("scope");
    if (it == token.payload().end() || !it->is_string()) throw Error(Errc::invalid_token, "access token has no scope claim");
    return parse_scopes(it->get<std::string>());
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_token) throw;
    throw Error(Errc::invalid_token, "access token is not a JWT");
  }
}

Json fetch_userinfo(const std::string& access_token, const std::string& userinfo_url) {
  const auto url = split_url(userinfo_url);
  const httplib::Headers headers{{"Authorization", "Bearer " + access_token}};
  auto& client = upstream_client(url.origin);
  auto res = client.Get(url.path, headers);
  if (!res) res = client.Get(url.path, headers);  // stale keep-alive connection
  if (!res) throw Error(Errc::upstream_unavailable, "userinfo endpoint unreachable");
  if (res->status == 401 || res->status == 403) throw Error(Errc::invalid_token, "userinfo rejected the access token");
  if (res->status != 200) {
    throw Error(Errc::upstream_unavailable, "userinfo answered HTTP " + std::to_string(res->status));
  }
  auto body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("sub") || !body["sub"].is_string()) {
    throw Error(Errc::malformed_upstream_response, "userinfo response has no sub");
  }
  return body;
}

CompactToken handle_ict_request(const IctRequest& request, const IssuerConfig& config, NonceCache& cache,
                                const Clock& clock, const UserinfoFetcher& fetch) {
  if (request.contexts.empty()) throw Error(Errc::empty_contexts, "at least one context is required");
  std::int64_t cap = kMaxIctValiditySeconds;
  for (const auto& ctx : request.contexts) {
    const auto it = config.allowed_contexts.find(ctx);
    if (it == config.allowed_contexts.end()) throw Error(Errc::unknown_context, "context " + ctx + " is not offered");
    cap = std::min(cap, it->second);
  }
  if (request.requested_validity && *request.requested_validity <= 0) bad_request("validity must be positive");
  if ((request.key_kind == KeyKind::long_term) != request.revocation_server.has_value()) {
    bad_request("rev_srv is required for, and only for, long_term keys");
  }

  // (1) scope
  const auto granted = check_e2e_scope(access_token_scopes(request.access_token), request.contexts);

  // (2) userinfo; validates the access token transitively
  Json userinfo = fetch(request.access_token);
  if (!userinfo.is_object() || !userinfo.contains("sub") || !userinfo["sub"].is_string()) {
    throw Error(Errc::malformed_upstream_response, "userinfo response has no sub");
  }

  // (3) proof of possession
  PublicKey client_key = [&] {
    try {
      return PublicKey::from_jwk(request.public_key);
    } catch (const Error& e) {
      if (e.code() == Errc::private_material_in_key) throw;
      throw Error(Errc::invalid_request, "public_key: " + e.detail());
    }
  }();
  const auto verdict = verify_pop(request.pop, client_key, cache, clock, config.max_skew_seconds);
  if (verdict != PopVerdict::accepted) throw Error(to_errc(verdict), "proof of possession rejected");

  // (4) claims
  const auto validity = std::min(request.requested_validity.value_or(config.default_validity_seconds), cap);
  const auto subject = userinfo["sub"].get<std::string>();
  auto claims = build_ict_claims(userinfo, subject, config.issuer_url, client_key.jwk(), granted, validity, clock,
                                 request.key_kind, request.revocation_server);

  // (5) signature
  return sign_token(claims, config.op_signing_key, config.key_id);
}

int http_status_for(Errc code) {
  switch (code) {
    case Errc::invalid_token: return 401;
    case Errc::insufficient_scope: return 403;
    case Errc::upstream_unavailable:
    case Errc::malformed_upstream_response: return 502;
    default: return 400;
  }
}

struct IssuerServer::Impl {
  IssuerConfig config;
  const Clock& clock;
  UserinfoFetcher fetcher;
  NonceCache cache;
  internal::BackgroundServer http;
  internal::InflightGauge gauge;

  Impl(IssuerConfig cfg, const Clock& c, UserinfoFetcher f)
      : config(std::move(cfg)), clock(c), fetcher(std::move(f)), cache(config.nonce_ttl_seconds) {
    config.validate();
    if (!fetcher) {
      fetcher = [url = config.userinfo_url](const std::string& at) { return fetch_userinfo(at, url); };
    }
    install();
  }

  void install() {
    auto& svr = http.server();
    svr.Post("/ict", [this](const httplib::Request& req, httplib::Response& res) {
      internal::InflightGauge::Guard guard(gauge);
      try {
        const auto at = internal::bearer_token(req);
        if (!at) throw Error(Errc::invalid_token, "missing bearer access token");
        auto body = Json::parse(req.body, nullptr, false);
        if (body.is_discarded()) throw Error(Errc::invalid_request, "body is not JSON");
        const auto request = IctRequest::from_json(body, *at);
        const auto ict = handle_ict_request(request, config, cache, clock, fetcher);
        internal::reply_json(res, 200, Json{{"ict", ict.serialized()}});
      } catch (const Error& e) {
        if (e.code() == Errc::invalid_token) res.set_header("WWW-Authenticate", "Bearer error=\"invalid_token\"");
        if (e.code() == Errc::insufficient_scope) {
          res.set_header("WWW-Authenticate", "Bearer error=\"insufficient_scope\"");
        }
        internal::reply_json(res, http_status_for(e.code()), Json{{"error", to_string(e.code())}, {"detail", e.detail()}});
      } catch (const std::exception& e) {
        internal::reply_json(res, 500, Json{{"error", "internal-error"}, {"detail", e.what()}});
      }
    });
    svr.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      internal::reply_json(res, 200, Json{{"status", "ok"}});
    });
  }
};

IssuerServer::IssuerServer(IssuerConfig config, const Clock& clock) : IssuerServer(std::move(config), clock, {}) {}
IssuerServer::IssuerServer(IssuerConfig config, const Clock& clock, UserinfoFetcher fetcher)
    : impl_(std::make_unique<Impl>(std::move(config), clock, std::move(fetcher))) {}
IssuerServer::~IssuerServer() = default;
int IssuerServer::start(const std::string& host, int port) { return impl_->http.start(host, port); }
void IssuerServer::run(const std::string& host, int port) { impl_->http.run(host, port); }
void IssuerServer::stop() { impl_->http.stop(); }
int IssuerServer::port() const { return impl_->http.port(); }
NonceCache& IssuerServer::nonce_cache() { return impl_->cache; }
int IssuerServer::peak_inflight() const { return impl_->gauge.peak(); }
void IssuerServer::reset_peak_inflight() { impl_->gauge.reset_peak(); }

}  // namespace oidc2
