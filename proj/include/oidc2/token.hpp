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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "oidc2/clock.hpp"
#include "oidc2/crypto.hpp"

namespace oidc2 {

/// Longest lifetime any ICT may have.
inline constexpr std::int64_t kMaxIctValiditySeconds = 3600;

/// JOSE "typ" header values. ICTs are typed so an ID Token can never be
/// accepted in their place.
inline constexpr std::string_view kIctType = "ict+jwt";
inline constexpr std::string_view kIdTokenType = "JWT";
inline constexpr std::string_view kAccessTokenType = "at+jwt";

enum class KeyKind { ephemeral, long_term };

std::string_view to_string(KeyKind kind) noexcept;
/// Accepts "ephemeral", "long_term" and "long-term".
KeyKind parse_key_kind(std::string_view text);

/// A signing key pair plus its lifecycle metadata. The private half is
/// optional so that a descriptor can also describe a peer's key.
struct KeyPairDescriptor {
  PublicKey public_part;
  std::optional<PrivateKey> private_part;
  KeyKind kind = KeyKind::ephemeral;
  std::optional<std::string> revocation_server;

  SignatureAlgorithm algorithm() const noexcept { return public_part.algorithm(); }

  /// Wraps an existing private key. Enforces long-term <=> revocation server.
  static KeyPairDescriptor from_private(PrivateKey key, KeyKind kind = KeyKind::ephemeral,
                                        std::optional<std::string> revocation_server = std::nullopt);
};

KeyPairDescriptor generate_signing_keypair(SignatureAlgorithm algorithm, KeyKind kind,
                                           std::optional<std::string> revocation_server = std::nullopt);
KeyPairDescriptor generate_signing_keypair(std::string_view algorithm, KeyKind kind,
                                           std::optional<std::string> revocation_server = std::nullopt);

using ContextSet = std::set<std::string>;

struct IctClaims {
  std::string issuer;
  std::string subject;
  UnixTime issued_at = 0;
  UnixTime not_before = 0;
  UnixTime expires_at = 0;
  std::string token_id;
  ContextSet contexts;
  Json confirmation_key;
  KeyKind key_kind = KeyKind::ephemeral;
  std::optional<std::string> revocation_server;
  Json identity_claims = Json::object();

  /// Payload JSON: iss, sub, iat, nbf, exp, jti, ctx, cnf.jwk, rev_srv, plus
  /// the identity claims at top level.
  Json to_json() const;
  /// Throws Error(malformed_token) when required members are missing or
  /// mistyped.
  static IctClaims from_json(const Json& payload);

  friend bool operator==(const IctClaims&, const IctClaims&) = default;
};

/// A JWS in compact serialization. The three base64url segments are kept
/// verbatim; the parsed header and payload are views of them and are never
/// re-serialized, so parse(serialized()) round-trips byte for byte.
class CompactToken {
 public:
  /// Throws Error(malformed_token) unless the input is three strict
  /// base64url segments whose first two decode to JSON objects.
  static CompactToken parse(std::string_view serialized);

  /// Signs `payload` under `header` (alg is filled in from the key).
  static CompactToken sign(Json header, const Json& payload, const PrivateKey& key);

  const Json& header() const noexcept { return header_; }
  const Json& payload() const noexcept { return payload_; }
  const Bytes& signature() const noexcept { return signature_; }
  std::string_view type() const;

  std::string serialized() const;
  std::string signing_input() const;

  /// Checks the signature and that the header alg matches the key.
  bool signature_valid(const PublicKey& key) const;

 private:
  std::string header_b64_;
  std::string payload_b64_;
  std::string signature_b64_;
  Json header_;
  Json payload_;
  Bytes signature_;
};

IctClaims build_ict_claims(const Json& user_info, std::string subject, std::string issuer,
                           const Json& confirmation_key, ContextSet contexts, std::int64_t validity_seconds,
                           const Clock& clock, KeyKind key_kind = KeyKind::ephemeral,
                           std::optional<std::string> revocation_server = std::nullopt);

CompactToken sign_token(const IctClaims& claims, const KeyPairDescriptor& op_key, std::string_view key_id);

/// Verifies typ, signature and validity window (inclusive at both ends).
IctClaims verify_token_signature(const CompactToken& token, const PublicKey& op_public_key, const Clock& clock);

/// Untrusted decode for issuer discovery. No signature or time checks.
std::pair<Json, IctClaims> decode_unverified(std::string_view serialized);

}  // namespace oidc2
