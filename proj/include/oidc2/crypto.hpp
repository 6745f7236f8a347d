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

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "oidc2/base64url.hpp"

struct evp_pkey_st;

namespace oidc2 {

using Json = nlohmann::json;

/// Asymmetric JWS algorithms usable for proof of possession. Symmetric
/// algorithms are deliberately absent: a shared secret cannot prove
/// possession to a third party.
enum class SignatureAlgorithm { rs256, es256 };

std::string_view to_string(SignatureAlgorithm alg) noexcept;

/// Accepts the JOSE name in any letter case ("RS256", "rs256"); throws
/// Error(unsupported_algorithm) for anything else, including HS*.
SignatureAlgorithm parse_algorithm(std::string_view name);

/// Public verification key. Cheap to copy; the underlying key is immutable.
class PublicKey {
 public:
  /// Imports a JWK (kty RSA with n/e, or kty EC on P-256 with x/y).
  /// Throws Error(private_material_in_key) if the object carries private
  /// members, Error(invalid_key) for anything unparseable or too weak.
  static PublicKey from_jwk(const Json& jwk);

  SignatureAlgorithm algorithm() const noexcept { return alg_; }

  /// Canonical public JWK with "kty" and key members only.
  const Json& jwk() const noexcept { return jwk_; }

  /// RFC 7638 SHA-256 thumbprint, base64url.
  std::string thumbprint() const;

  bool verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature) const;
  bool verify(std::string_view message, std::span<const std::uint8_t> signature) const;

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.jwk_ == b.jwk_; }

 private:
  friend class PrivateKey;
  PublicKey(std::shared_ptr<evp_pkey_st> key, SignatureAlgorithm alg, Json jwk)
      : key_(std::move(key)), alg_(alg), jwk_(std::move(jwk)) {}

  std::shared_ptr<evp_pkey_st> key_;
  SignatureAlgorithm alg_;
  Json jwk_;
};

/// Private signing key with its public half.
class PrivateKey {
 public:
  static PrivateKey generate(SignatureAlgorithm alg);
  static PrivateKey from_pem(std::string_view pem);

  std::string to_pem() const;
  SignatureAlgorithm algorithm() const noexcept { return public_.algorithm(); }
  const PublicKey& public_key() const noexcept { return public_; }

  Bytes sign(std::span<const std::uint8_t> message) const;
  Bytes sign(std::string_view message) const;

 private:
  PrivateKey(std::shared_ptr<evp_pkey_st> key, PublicKey pub)
      : key_(std::move(key)), public_(std::move(pub)) {}

  std::shared_ptr<evp_pkey_st> key_;
  PublicKey public_;
};

/// RFC 7638 thumbprint computed straight from JSON members.
std::string jwk_thumbprint(const Json& jwk);

/// True if the JWK carries any private-key member (d, p, q, dp, dq, qi, oth, k).
bool has_private_members(const Json& jwk);

Bytes random_bytes(std::size_t n);
Bytes sha256(std::string_view data);

}  // namespace oidc2
