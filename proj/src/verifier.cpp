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

#include "oidc2/verifier.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "oidc2/http_util.hpp"

namespace oidc2 {
namespace {

AuthenticationResult reject_with(Errc code, const std::string& detail, const IctClaims* claims = nullptr) {
  auto r = AuthenticationResult::rejected(code, detail);
  if (claims) {
    r.issuer = claims->issuer;
    r.subject = claims->subject;
    r.expires_at = claims->expires_at;
  }
  return r;
}

std::optional<Json> default_jwks_fetch(const std::string& url) {
  const auto res = http_get(url);
  if (!res || res->status != 200) return std::nullopt;
  auto body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded()) return std::nullopt;
  return body;
}

}  // namespace

std::string_view to_string(OpClass c) noexcept {
  switch (c) {
    case OpClass::authoritative: return "aop";
    case OpClass::verifying: return "vop";
    case OpClass::insecure: break;
  }
  return "insecure";
}

OpClass parse_op_class(std::string_view text) {
  if (text == "insecure") return OpClass::insecure;
  if (text == "aop" || text == "authoritative") return OpClass::authoritative;
  if (text == "vop" || text == "verifying") return OpClass::verifying;
  throw std::invalid_argument("unknown OP class " + std::string(text));
}

TrustEntry TrustEntry::normalized() const {
  TrustEntry e = *this;
  if (e.klass == OpClass::insecure) {
    e.authoritative_claims.clear();
    e.verified_claims.clear();
  } else {
    e.authoritative_claims.insert("sub");
  }
  return e;
}

TrustPolicy TrustPolicy::from_json(const Json& j) {
  if (j.value("default", std::string("insecure")) != "insecure") {
    throw std::invalid_argument("the only supported default class is insecure");
  }
  TrustPolicy p;
  for (const auto& e : j.value("issuers", Json::array())) {
    TrustEntry entry{parse_op_class(e.at("class").get<std::string>()),
                     e.value("authoritative_claims", std::set<std::string>{}),
                     e.value("verified_claims", std::set<std::string>{}), e.value("rank", 0)};
    p.set(e.at("iss").get<std::string>(), entry);
  }
  return p;
}

Json TrustPolicy::to_json() const {
  Json issuers = Json::array();
  for (const auto& [iss, e] : entries_) {
    issuers.push_back(Json{{"iss", iss},
                           {"class", to_string(e.klass)},
                           {"authoritative_claims", e.authoritative_claims},
                           {"verified_claims", e.verified_claims},
                           {"rank", e.rank}});
  }
  return Json{{"default", "insecure"}, {"issuers", issuers}};
}

TrustPolicy TrustPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trust policy " + path);
  return from_json(Json::parse(in));
}

void TrustPolicy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trust policy " + path);
  out << to_json().dump(2) << '\n';
}

TrustEntry classify_op(const std::string& issuer, const TrustPolicy& policy) {
  const auto it = policy.entries().find(issuer);
  return it == policy.entries().end() ? TrustEntry{} : it->second;
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::authoritative: return "authoritative";
    case Provenance::verified: return "verified";
    case Provenance::uncertified: break;
  }
  return "uncertified";
}

AuthenticationResult AuthenticationResult::rejected(Errc reason, std::string detail) {
  AuthenticationResult r;
  r.rejection_reason = reason;
  r.detail = std::move(detail);
  return r;
}

Json AuthenticationResult::to_json() const {
  Json j{{"verdict", accepted ? "accepted" : "rejected"}, {"issuer", issuer}, {"subject", subject}};
  if (accepted) {
    Json cl = Json::object();
    for (const auto& [name, c] : claims) cl[name] = Json{{"value", c.value}, {"provenance", to_string(c.provenance)}};
    j["claims"] = cl;
    j["confirmation_key"] = confirmation_key;
    j["key_kind"] = to_string(key_kind);
    j["contexts"] = contexts;
    j["expires_at"] = expires_at;
    if (revocation_server) j["rev_srv"] = *revocation_server;
  }
  if (rejection_reason) {
    j["rejection_reason"] = to_string(*rejection_reason);
    j["detail"] = detail;
  }
  return j;
}

KeyLookup static_key_lookup(std::map<std::pair<std::string, std::string>, PublicKey> keys) {
  return [keys = std::move(keys)](const std::string& iss, const std::string& kid) -> std::optional<PublicKey> {
    const auto it = keys.find({iss, kid});
    if (it == keys.end()) return std::nullopt;
    return it->second;
  };
}

std::map<std::string, PublicKey> parse_jwks(const Json& jwks) {
  std::map<std::string, PublicKey> out;
  if (!jwks.is_object() || !jwks.contains("keys") || !jwks["keys"].is_array()) return out;
  for (const auto& k : jwks["keys"]) {
    if (!k.is_object() || !k.contains("kid") || !k["kid"].is_string()) continue;
    try {
      out.emplace(k["kid"].get<std::string>(), PublicKey::from_jwk(k));
    } catch (const Error&) {
      // unusable key types are skipped
    }
  }
  return out;
}

JwksKeyCache::JwksKeyCache(const Clock& clock, std::int64_t ttl_seconds, Fetcher fetcher)
    : clock_(clock), ttl_(ttl_seconds), fetcher_(fetcher ? std::move(fetcher) : Fetcher(default_jwks_fetch)) {}

std::optional<JwksKeyCache::Entry> JwksKeyCache::fetch(const std::string& issuer) {
  const auto doc = fetcher_(join_url(issuer, "/.well-known/jwks.json"));
  std::lock_guard lock(mu_);
  ++fetches_;
  if (!doc) return std::nullopt;
  Entry e{clock_.now(), parse_jwks(*doc)};
  cache_[issuer] = e;
  return e;
}

std::optional<PublicKey> JwksKeyCache::lookup(const std::string& issuer, const std::string& kid) {
  {
    std::lock_guard lock(mu_);
    const auto it = cache_.find(issuer);
    if (it != cache_.end() && clock_.now() - it->second.fetched_at <= ttl_) {
      const auto k = it->second.keys.find(kid);
      if (k != it->second.keys.end()) return k->second;
    }
  }
  const auto fresh = fetch(issuer);
  if (!fresh) return std::nullopt;
  const auto k = fresh->keys.find(kid);
  if (k == fresh->keys.end()) return std::nullopt;
  return k->second;
}

KeyLookup JwksKeyCache::as_lookup() {
  return [this](const std::string& iss, const std::string& kid) { return lookup(iss, kid); };
}

std::size_t JwksKeyCache::fetch_count() const {
  std::lock_guard lock(mu_);
  return fetches_;
}

RevocationStatus check_revocation(const std::string& revocation_server, const std::string& key_thumbprint) {
  std::optional<HttpResponse> res;
  try {
    res = http_get(join_url(revocation_server, "/revoked"), std::nullopt, std::chrono::seconds(3));
  } catch (const Error& e) {
    throw Error(Errc::revocation_unreachable, e.detail());
  }
  if (!res) throw Error(Errc::revocation_unreachable, "cannot reach " + revocation_server);
  if (res->status != 200) {
    throw Error(Errc::revocation_unreachable, "revocation server answered HTTP " + std::to_string(res->status));
  }
  const auto list = Json::parse(res->body, nullptr, false);
  if (list.is_discarded() || !list.is_array()) throw Error(Errc::revocation_unreachable, "revocation list is not an array");
  for (const auto& entry : list) {
    if (entry.is_string() && entry.get<std::string>() == key_thumbprint) return RevocationStatus::revoked;
  }
  return RevocationStatus::good;
}

AuthenticationResult verify_ict(std::string_view token, const KeyLookup& op_keys, const TrustPolicy& policy,
                                std::string_view expected_context, const Clock& clock, const VerifyOptions& options) {
  std::optional<CompactToken> parsed;
  IctClaims unverified;
  try {
    parsed = CompactToken::parse(token);
    if (parsed->type() != kIctType) {
      return reject_with(Errc::wrong_token_type, "typ is '" + std::string(parsed->type()) + "'");
    }
    unverified = IctClaims::from_json(parsed->payload());
  } catch (const Error& e) {
    return reject_with(e.code(), e.detail());
  }

  // Trust relationship before any cryptography.
  TrustEntry entry = classify_op(unverified.issuer, policy);
  if (!policy.contains(unverified.issuer) && options.on_unknown_issuer &&
      options.on_unknown_issuer(unverified.issuer, unverified)) {
    entry = TrustEntry{OpClass::authoritative, {}, {}, 0}.normalized();
  }
  if (entry.klass == OpClass::insecure) {
    return reject_with(Errc::untrusted_issuer, unverified.issuer + " is not trusted", &unverified);
  }

  const auto kid = parsed->header().value("kid", std::string());
  const auto key = op_keys(unverified.issuer, kid);
  if (!key) return reject_with(Errc::unknown_key_id, "no key '" + kid + "' for " + unverified.issuer, &unverified);

  IctClaims claims;
  try {
    claims = verify_token_signature(*parsed, *key, clock);
  } catch (const Error& e) {
    return reject_with(e.code(), e.detail(), &unverified);
  }

  if (!claims.contexts.count(std::string(expected_context))) {
    return reject_with(Errc::context_mismatch, "token is not valid for context " + std::string(expected_context),
                       &claims);
  }

  if (claims.key_kind == KeyKind::long_term) {
    try {
      const auto thumbprint = jwk_thumbprint(claims.confirmation_key);
      if (options.revocation(*claims.revocation_server, thumbprint) == RevocationStatus::revoked) {
        return reject_with(Errc::key_revoked, "confirmation key " + thumbprint + " is revoked", &claims);
      }
    } catch (const Error& e) {
      return reject_with(Errc::revocation_unreachable, e.detail(), &claims);
    }
  }

  AuthenticationResult r;
  r.accepted = true;
  r.issuer = claims.issuer;
  r.subject = claims.subject;
  r.confirmation_key = claims.confirmation_key;
  r.key_kind = claims.key_kind;
  r.revocation_server = claims.revocation_server;
  r.contexts = claims.contexts;
  r.expires_at = claims.expires_at;
  r.rank = entry.rank;
  auto annotate = [&](const std::string& name, const Json& value) {
    Provenance p = Provenance::uncertified;
    if (entry.authoritative_claims.count(name)) {
      p = Provenance::authoritative;
    } else if (entry.verified_claims.count(name)) {
      p = Provenance::verified;
    }
    r.claims[name] = CertifiedClaim{value, p};
  };
  annotate("sub", claims.subject);
  for (const auto& [name, value] : claims.identity_claims.items()) annotate(name, value);
  return r;
}

MultiIctSelection select_from_multiple(std::span<const std::string> tokens, const KeyLookup& op_keys,
                                       const TrustPolicy& policy, std::string_view expected_context,
                                       const Clock& clock, const std::optional<PublicKey>& proven_key,
                                       const VerifyOptions& options) {
  MultiIctSelection out;
  if (tokens.empty()) {
    out.result = AuthenticationResult::rejected(Errc::all_rejected, "no tokens presented");
    return out;
  }

  std::optional<std::string> shared_thumbprint;
  if (proven_key) shared_thumbprint = proven_key->thumbprint();
  for (const auto& t : tokens) {
    std::string thumb;
    try {
      thumb = jwk_thumbprint(decode_unverified(t).second.confirmation_key);
    } catch (const std::exception&) {
      continue;  // reported per token below
    }
    if (!shared_thumbprint) shared_thumbprint = thumb;
    if (thumb != *shared_thumbprint) {
      out.result = AuthenticationResult::rejected(Errc::key_mismatch, "tokens certify different keys");
      return out;
    }
  }

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.per_token.push_back(verify_ict(tokens[i], op_keys, policy, expected_context, clock, options));
    const auto& r = out.per_token.back();
    if (!r.accepted) continue;
    if (!out.chosen_index) {
      out.chosen_index = i;
      continue;
    }
    const auto& best = out.per_token[*out.chosen_index];
    // Higher rank wins, then earlier expiry, then the smaller token string.
    const auto key_of = [&](const AuthenticationResult& a, const std::string& s) {
      return std::make_tuple(-a.rank, a.expires_at, std::string_view(s));
    };
    if (key_of(r, tokens[i]) < key_of(best, tokens[*out.chosen_index])) out.chosen_index = i;
  }

  if (!out.chosen_index) {
    std::string reasons;
    for (std::size_t i = 0; i < out.per_token.size(); ++i) {
      const auto& r = out.per_token[i];
      reasons += (i ? ", " : "") + std::to_string(i) + ": " +
                 std::string(r.rejection_reason ? to_string(*r.rejection_reason) : "rejected");
    }
    out.result = AuthenticationResult::rejected(Errc::all_rejected, reasons);
    return out;
  }
  out.result = out.per_token[*out.chosen_index];
  return out;
}

}  // namespace oidc2
