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

#include "oidc2/op_stub.hpp"

#include <fstream>
#include <sstream>

#include "background_server.hpp"
#include "oidc2/error.hpp"

namespace oidc2 {
namespace {

constexpr std::size_t kTokenEntropyBytes = 32;
constexpr std::size_t kPurgeEvery = 512;
constexpr std::string_view kClientId = "oidc2-client";

std::string random_opaque() { return base64url_encode(random_bytes(kTokenEntropyBytes)); }

Json record_to_json(const IssuedTokenRecord& r) {
  return Json{{"access_token", r.access_token}, {"refresh_token", r.refresh_token}, {"sub", r.sub},
              {"scopes", r.scopes},             {"expires_at", r.expires_at}};
}

IssuedTokenRecord record_from_json(const Json& j) {
  return IssuedTokenRecord{j.at("access_token").get<std::string>(), j.at("refresh_token").get<std::string>(),
                           j.at("sub").get<std::string>(), j.at("scopes").get<ScopeSet>(),
                           j.at("expires_at").get<UnixTime>()};
}

}  // namespace

ScopeSet parse_scopes(std::string_view text) {
  ScopeSet out;
  std::istringstream in{std::string(text)};
  std::string scope;
  while (in >> scope) out.insert(scope);
  return out;
}

std::string join_scopes(const ScopeSet& scopes) {
  std::string out;
  for (const auto& s : scopes) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

std::vector<StubUser> load_stub_users(const Json& fixture) {
  std::vector<StubUser> users;
  std::set<std::string> names;
  std::set<std::string> subs;
  for (const auto& u : fixture.at("users")) {
    StubUser user{u.at("username").get<std::string>(), u.at("password").get<std::string>(),
                  u.at("sub").get<std::string>(), u.value("claims", Json::object()),
                  u.value("granted_scopes", ScopeSet{})};
    if (!names.insert(user.username).second) throw std::invalid_argument("duplicate username " + user.username);
    if (!subs.insert(user.sub).second) throw std::invalid_argument("duplicate sub " + user.sub);
    users.push_back(std::move(user));
  }
  return users;
}

std::vector<StubUser> load_stub_users_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open user fixture " + path);
  return load_stub_users(Json::parse(in));
}

Json TokenResponse::to_json() const {
  return Json{{"access_token", access_token}, {"refresh_token", refresh_token}, {"id_token", id_token},
              {"token_type", token_type},     {"expires_in", expires_in}};
}

TokenResponse TokenResponse::from_json(const Json& j) {
  return TokenResponse{j.at("access_token").get<std::string>(), j.at("refresh_token").get<std::string>(),
                       j.at("id_token").get<std::string>(), j.value("token_type", "Bearer"),
                       j.value("expires_in", std::int64_t{0})};
}

Json filter_claims_by_scope(const Json& claims, const ScopeSet& scopes) {
  if (scopes.count("profile")) return claims;
  Json out = Json::object();
  auto release = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) {
      if (claims.contains(n)) out[n] = claims[n];
    }
  };
  if (scopes.count("email")) release({"email", "email_verified"});
  if (scopes.count("phone")) release({"phone_number", "phone_number_verified"});
  return out;
}

OpStub::OpStub(std::string issuer_url, std::vector<StubUser> users, KeyPairDescriptor signing_key,
               const Clock& clock)
    : issuer_(std::move(issuer_url)),
      users_(std::move(users)),
      signing_key_(std::move(signing_key)),
      key_id_(signing_key_.public_part.thumbprint()),
      clock_(clock) {
  if (!signing_key_.private_part) throw Error(Errc::missing_private_key, "stub needs a private signing key");
}

TokenResponse OpStub::issue_tokens(std::string_view username, std::string_view password, const ScopeSet& scopes) {
  const StubUser* user = nullptr;
  for (const auto& u : users_) {
    if (u.username == username) user = &u;
  }
  if (!user || user->password != password) throw Error(Errc::bad_credentials, "unknown user or wrong password");
  for (const auto& s : scopes) {
    if (!user->granted_scopes.count(s)) throw Error(Errc::scope_not_granted, "scope " + s + " not granted");
  }
  return mint(*user, scopes);
}

TokenResponse OpStub::refresh(std::string_view refresh_token) {
  std::string sub;
  ScopeSet scopes;
  {
    std::lock_guard lock(mu_);
    auto it = refresh_tokens_.find(std::string(refresh_token));
    if (it == refresh_tokens_.end()) throw Error(Errc::invalid_refresh_token, "refresh token unknown or rotated");
    sub = it->second.sub;
    scopes = it->second.scopes;
    refresh_tokens_.erase(it);
  }
  const StubUser* user = find_user_by_sub(sub);
  if (!user) throw Error(Errc::invalid_refresh_token, "user no longer exists");
  return mint(*user, scopes);
}

Json OpStub::handle_userinfo(std::string_view access_token) const {
  IssuedTokenRecord record;
  {
    std::lock_guard lock(mu_);
    auto it = access_tokens_.find(std::string(access_token));
    if (it == access_tokens_.end()) throw Error(Errc::invalid_token, "unknown access token");
    record = it->second;
  }
  if (clock_.now() > record.expires_at) throw Error(Errc::invalid_token, "access token expired");
  const StubUser* user = find_user_by_sub(record.sub);
  if (!user) throw Error(Errc::invalid_token, "user no longer exists");
  Json out = filter_claims_by_scope(user->claims, record.scopes);
  out["sub"] = user->sub;
  return out;
}

Json OpStub::serve_jwks() const {
  Json jwk = signing_key_.public_part.jwk();
  jwk["kid"] = key_id_;
  jwk["alg"] = to_string(signing_key_.algorithm());
  jwk["use"] = "sig";
  return Json{{"keys", Json::array({jwk})}};
}

TokenResponse OpStub::mint(const StubUser& user, const ScopeSet& scopes) {
  const auto now = clock_.now();
  const auto& key = *signing_key_.private_part;

  Json at_claims{{"iss", issuer_},
                 {"sub", user.sub},
                 {"aud", issuer_},
                 {"client_id", kClientId},
                 {"scope", join_scopes(scopes)},
                 {"iat", now},
                 {"exp", now + kAccessTokenLifetime},
                 {"jti", base64url_encode(random_bytes(16))}};
  auto access = CompactToken::sign(Json{{"typ", kAccessTokenType}, {"kid", key_id_}}, at_claims, key).serialized();

  Json id_claims = filter_claims_by_scope(user.claims, scopes);
  id_claims.update(Json{{"iss", issuer_},
                        {"sub", user.sub},
                        {"aud", kClientId},
                        {"iat", now},
                        {"auth_time", now},
                        {"exp", now + kAccessTokenLifetime}});
  auto id_token = CompactToken::sign(Json{{"typ", kIdTokenType}, {"kid", key_id_}}, id_claims, key).serialized();

  IssuedTokenRecord record{access, random_opaque(), user.sub, scopes, now + kAccessTokenLifetime};
  {
    std::lock_guard lock(mu_);
    access_tokens_[record.access_token] = record;
    refresh_tokens_[record.refresh_token] = record;
    if (++issued_since_purge_ >= kPurgeEvery) {
      issued_since_purge_ = 0;
      std::erase_if(access_tokens_, [now](const auto& e) { return now > e.second.expires_at; });
    }
  }
  return TokenResponse{record.access_token, record.refresh_token, id_token, "Bearer", kAccessTokenLifetime};
}

const StubUser* OpStub::find_user_by_sub(const std::string& sub) const {
  for (const auto& u : users_) {
    if (u.sub == sub) return &u;
  }
  return nullptr;
}

Json OpStub::snapshot() const {
  std::lock_guard lock(mu_);
  Json access = Json::array();
  Json refresh = Json::array();
  for (const auto& [_, r] : access_tokens_) access.push_back(record_to_json(r));
  for (const auto& [_, r] : refresh_tokens_) refresh.push_back(record_to_json(r));
  return Json{{"access_tokens", access}, {"refresh_tokens", refresh}};
}

void OpStub::restore(const Json& snapshot) {
  std::unordered_map<std::string, IssuedTokenRecord> access;
  std::unordered_map<std::string, IssuedTokenRecord> refresh;
  for (const auto& j : snapshot.at("access_tokens")) {
    auto r = record_from_json(j);
    access[r.access_token] = r;
  }
  for (const auto& j : snapshot.at("refresh_tokens")) {
    auto r = record_from_json(j);
    refresh[r.refresh_token] = r;
  }
  std::lock_guard lock(mu_);
  access_tokens_ = std::move(access);
  refresh_tokens_ = std::move(refresh);
}

void OpStub::save_snapshot(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot " + path);
  out << snapshot().dump(2) << '\n';
}

void OpStub::load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read snapshot " + path);
  restore(Json::parse(in));
}

struct OpStubServer::Impl {
  OpStub& stub;
  internal::BackgroundServer http;
  internal::InflightGauge token_gauge;

  explicit Impl(OpStub& s) : stub(s) {}

  static void reply_error(httplib::Response& res, int status, const Error& e) {
    internal::reply_json(res, status, Json{{"error", to_string(e.code())}, {"detail", e.detail()}});
  }

  void install() {
    auto& svr = http.server();
    svr.Post("/token", [this](const httplib::Request& req, httplib::Response& res) {
      internal::InflightGauge::Guard guard(token_gauge);
      try {
        const auto grant = req.get_param_value("grant_type");
        TokenResponse tokens;
        if (grant == "password") {
          tokens = stub.issue_tokens(req.get_param_value("username"), req.get_param_value("password"),
                                     parse_scopes(req.get_param_value("scope")));
        } else if (grant == "refresh_token") {
          tokens = stub.refresh(req.get_param_value("refresh_token"));
        } else {
          internal::reply_json(res, 400, Json{{"error", "unsupported-grant-type"}, {"detail", grant}});
          return;
        }
        internal::reply_json(res, 200, tokens.to_json());
      } catch (const Error& e) {
        reply_error(res, e.code() == Errc::bad_credentials ? 401 : 400, e);
      }
    });
    svr.Get("/userinfo", [this](const httplib::Request& req, httplib::Response& res) {
      const auto at = internal::bearer_token(req);
      try {
        if (!at) throw Error(Errc::invalid_token, "missing bearer token");
        internal::reply_json(res, 200, stub.handle_userinfo(*at));
      } catch (const Error& e) {
        res.set_header("WWW-Authenticate", "Bearer error=\"invalid_token\"");
        reply_error(res, 401, e);
      }
    });
    svr.Get("/.well-known/jwks.json", [this](const httplib::Request&, httplib::Response& res) {
      internal::reply_json(res, 200, stub.serve_jwks());
    });
    svr.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      internal::reply_json(res, 200, Json{{"status", "ok"}});
    });
  }
};

OpStubServer::OpStubServer(OpStub& stub) : impl_(std::make_unique<Impl>(stub)) { impl_->install(); }
OpStubServer::~OpStubServer() = default;
int OpStubServer::start(const std::string& host, int port) { return impl_->http.start(host, port); }
int OpStubServer::bind(const std::string& host, int port) { return impl_->http.bind(host, port); }
void OpStubServer::listen_in_background() { impl_->http.listen_in_background(); }
void OpStubServer::run(const std::string& host, int port) { impl_->http.run(host, port); }
void OpStubServer::stop() { impl_->http.stop(); }
int OpStubServer::port() const { return impl_->http.port(); }
int OpStubServer::token_peak_inflight() const { return impl_->token_gauge.peak(); }
void OpStubServer::reset_peak_inflight() { impl_->token_gauge.reset_peak(); }

struct RevocationListServer::Impl {
  internal::BackgroundServer http;
  std::mutex mu;
  std::set<std::string> revoked;
};

RevocationListServer::RevocationListServer() : impl_(std::make_unique<Impl>()) {
  impl_->http.server().Get("/revoked", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(impl_->mu);
    internal::reply_json(res, 200, Json(impl_->revoked));
  });
}
RevocationListServer::~RevocationListServer() = default;

void RevocationListServer::revoke(const std::string& thumbprint) {
  std::lock_guard lock(impl_->mu);
  impl_->revoked.insert(thumbprint);
}

int RevocationListServer::start(const std::string& host, int port) { return impl_->http.start(host, port); }
void RevocationListServer::stop() { impl_->http.stop(); }
std::string RevocationListServer::url() const { return "http://127.0.0.1:" + std::to_string(impl_->http.port()); }

}  // namespace oidc2
