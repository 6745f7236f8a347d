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

#include "oidc2/token.hpp"

#include <array>

#include "oidc2/error.hpp"

namespace oidc2 {
namespace {

const std::array<std::string_view, 9> kReservedClaims{"iss", "sub", "iat", "nbf", "exp",
                                                      "jti", "ctx", "cnf", "rev_srv"};

bool reserved(const std::string& name) {
  for (auto r : kReservedClaims) {
    if (r == name) return true;
  }
  return false;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::malformed_token, what); }

Json parse_segment(std::string_view b64, const char* what) {
  auto bytes = base64url_decode(b64);
  if (!bytes) malformed(std::string("bad base64url in ") + what);
  auto parsed = Json::parse(bytes->begin(), bytes->end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) malformed(std::string(what) + " is not a JSON object");
  return parsed;
}

void check_key_kind(KeyKind kind, const std::optional<std::string>& revocation_server) {
  if ((kind == KeyKind::long_term) != revocation_server.has_value()) {
    throw Error(Errc::invalid_request, "a revocation server is required for, and only for, long-term keys");
  }
}

std::string random_token_id() { return base64url_encode(random_bytes(16)); }

}  // namespace

std::string_view to_string(KeyKind kind) noexcept {
  return kind == KeyKind::long_term ? "long_term" : "ephemeral";
}

KeyKind parse_key_kind(std::string_view text) {
  if (text == "ephemeral") return KeyKind::ephemeral;
  if (text == "long_term" || text == "long-term") return KeyKind::long_term;
  throw Error(Errc::invalid_request, "unknown key kind " + std::string(text));
}

KeyPairDescriptor KeyPairDescriptor::from_private(PrivateKey key, KeyKind kind,
                                                  std::optional<std::string> revocation_server) {
  check_key_kind(kind, revocation_server);
  PublicKey pub = key.public_key();
  return KeyPairDescriptor{std::move(pub), std::move(key), kind, std::move(revocation_server)};
}

KeyPairDescriptor generate_signing_keypair(SignatureAlgorithm algorithm, KeyKind kind,
                                           std::optional<std::string> revocation_server) {
  check_key_kind(kind, revocation_server);
  return KeyPairDescriptor::from_private(PrivateKey::generate(algorithm), kind, std::move(revocation_server));
}

KeyPairDescriptor generate_signing_keypair(std::string_view algorithm, KeyKind kind,
                                           std::optional<std::string> revocation_server) {
  return generate_signing_keypair(parse_algorithm(algorithm), kind, std::move(revocation_server));
}

Json IctClaims::to_json() const {
  Json out = identity_claims.is_object() ? identity_claims : Json::object();
  out["iss"] = issuer;
  out["sub"] = subject;
  out["iat"] = issued_at;
  out["nbf"] = not_before;
  out["exp"] = expires_at;
  out["jti"] = token_id;
  out["ctx"] = contexts;
  out["cnf"] = Json{{"jwk", confirmation_key}};
  if (revocation_server) out["rev_srv"] = *revocation_server;
  return out;
}

IctClaims IctClaims::from_json(const Json& payload) {
  if (!payload.is_object()) malformed("payload is not an object");
  try {
    IctClaims c;
    c.issuer = payload.at("iss").get<std::string>();
    c.subject = payload.at("sub").get<std::string>();
    c.issued_at = payload.at("iat").get<UnixTime>();
    c.not_before = payload.at("nbf").get<UnixTime>();
    c.expires_at = payload.at("exp").get<UnixTime>();
    c.token_id = payload.at("jti").get<std::string>();
    c.contexts = payload.at("ctx").get<ContextSet>();
    if (c.contexts.empty()) malformed("ctx is empty");
    c.confirmation_key = payload.at("cnf").at("jwk");
    if (!c.confirmation_key.is_object()) malformed("cnf.jwk is not an object");
    if (payload.contains("rev_srv")) {
      c.revocation_server = payload["rev_srv"].get<std::string>();
      c.key_kind = KeyKind::long_term;
    }
    for (const auto& [name, value] : payload.items()) {
      if (!reserved(name)) c.identity_claims[name] = value;
    }
    return c;
  } catch (const Json::exception& e) {
    malformed(e.what());
  }
}

namespace {

std::array<std::string_view, 3> split_segments(std::string_view serialized) {
  const auto first = serialized.find('.');
  const auto second = first == std::string_view::npos ? first : serialized.find('.', first + 1);
  if (second == std::string_view::npos || serialized.find('.', second + 1) != std::string_view::npos) {
    malformed("expected three dot-separated segments");
  }
  return {serialized.substr(0, first), serialized.substr(first + 1, second - first - 1), serialized.substr(second + 1)};
}

}  // namespace

CompactToken CompactToken::parse(std::string_view serialized) {
  const auto [header, payload, signature] = split_segments(serialized);
  CompactToken t;
  t.header_b64_ = header;
  t.payload_b64_ = payload;
  t.signature_b64_ = signature;
  t.header_ = parse_segment(t.header_b64_, "header");
  t.payload_ = parse_segment(t.payload_b64_, "payload");
  auto sig = base64url_decode(t.signature_b64_);
  if (!sig) malformed("bad base64url in signature");
  t.signature_ = std::move(*sig);
  return t;
}

CompactToken CompactToken::sign(Json header, const Json& payload, const PrivateKey& key) {
  header["alg"] = to_string(key.algorithm());
  CompactToken t;
  t.header_b64_ = base64url_encode(header.dump());
  t.payload_b64_ = base64url_encode(payload.dump());
  t.header_ = std::move(header);
  t.payload_ = payload;
  t.signature_ = key.sign(t.signing_input());
  t.signature_b64_ = base64url_encode(t.signature_);
  return t;
}

std::string_view CompactToken::type() const {
  const auto it = header_.find("typ");
  if (it == header_.end() || !it->is_string()) return {};
  return it->get_ref<const std::string&>();
}

std::string CompactToken::serialized() const { return signing_input() + "." + signature_b64_; }

std::string CompactToken::signing_input() const { return header_b64_ + "." + payload_b64_; }

bool CompactToken::signature_valid(const PublicKey& key) const {
  const auto alg = header_.find("alg");
  if (alg == header_.end() || !alg->is_string() || *alg != to_string(key.algorithm())) return false;
  return key.verify(signing_input(), signature_);
}

IctClaims build_ict_claims(const Json& user_info, std::string subject, std::string issuer,
                           const Json& confirmation_key, ContextSet contexts, std::int64_t validity_seconds,
                           const Clock& clock, KeyKind key_kind, std::optional<std::string> revocation_server) {
  if (validity_seconds > kMaxIctValiditySeconds) {
    throw Error(Errc::validity_too_long, std::to_string(validity_seconds) + " s exceeds 3600 s");
  }
  if (validity_seconds <= 0) throw Error(Errc::invalid_request, "validity must be positive");
  if (contexts.empty()) throw Error(Errc::empty_contexts, "at least one context is required");
  if (has_private_members(confirmation_key)) {
    throw Error(Errc::private_material_in_key, "confirmation key carries private members");
  }
  check_key_kind(key_kind, revocation_server);

  IctClaims c;
  c.issuer = std::move(issuer);
  c.subject = std::move(subject);
  c.issued_at = clock.now();
  c.not_before = c.issued_at;
  c.expires_at = c.issued_at + validity_seconds;
  c.token_id = random_token_id();
  c.contexts = std::move(contexts);
  c.confirmation_key = confirmation_key;
  c.key_kind = key_kind;
  c.revocation_server = std::move(revocation_server);
  if (user_info.is_object()) {
    for (const auto& [name, value] : user_info.items()) {
      if (!reserved(name)) c.identity_claims[name] = value;
    }
  }
  return c;
}

CompactToken sign_token(const IctClaims& claims, const KeyPairDescriptor& op_key, std::string_view key_id) {
  if (!op_key.private_part) throw Error(Errc::missing_private_key, "OP key has no private part");
  if (claims.expires_at - claims.issued_at > kMaxIctValiditySeconds) {
    throw Error(Errc::validity_too_long, "claims exceed the 3600 s lifetime cap");
  }
  Json header{{"typ", kIctType}, {"kid", key_id}};
  return CompactToken::sign(std::move(header), claims.to_json(), *op_key.private_part);
}

IctClaims verify_token_signature(const CompactToken& token, const PublicKey& op_public_key, const Clock& clock) {
  if (token.type() != kIctType) {
    throw Error(Errc::wrong_token_type, "typ is '" + std::string(token.type()) + "', expected ict+jwt");
  }
  if (!token.signature_valid(op_public_key)) throw Error(Errc::signature_invalid, "signature does not verify");
  auto claims = IctClaims::from_json(token.payload());
  if (claims.expires_at - claims.issued_at > kMaxIctValiditySeconds || claims.expires_at <= claims.issued_at) {
    throw Error(Errc::malformed_token, "validity window violates the lifetime cap");
  }
  const auto now = clock.now();
  if (now < claims.not_before) throw Error(Errc::token_not_yet_valid, "token not valid before " + std::to_string(claims.not_before));
  if (now > claims.expires_at) throw Error(Errc::token_expired, "token expired at " + std::to_string(claims.expires_at));
  return claims;
}

std::pair<Json, IctClaims> decode_unverified(std::string_view serialized) {
  // The signature segment is deliberately not inspected.
  const auto [header, payload, signature] = split_segments(serialized);
  return {parse_segment(header, "header"), IctClaims::from_json(parse_segment(payload, "payload"))};
}

}  // namespace oidc2
