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

#include "oidc2/crypto.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/bio.h>
#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>
#include <openssl/rand.h>

#include "oidc2/error.hpp"

namespace oidc2 {
namespace {

constexpr int kMinRsaBits = 2048;
constexpr std::size_t kP256CoordBytes = 32;

std::shared_ptr<EVP_PKEY> own(EVP_PKEY* p) { return {p, EVP_PKEY_free}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const noexcept { Free(p); }
};
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, Deleter<EVP_PKEY_CTX, EVP_PKEY_CTX_free>>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, Deleter<EVP_MD_CTX, EVP_MD_CTX_free>>;
using BnPtr = std::unique_ptr<BIGNUM, Deleter<BIGNUM, BN_free>>;
using BioPtr = std::unique_ptr<BIO, Deleter<BIO, BIO_free_all>>;
using ParamBldPtr = std::unique_ptr<OSSL_PARAM_BLD, Deleter<OSSL_PARAM_BLD, OSSL_PARAM_BLD_free>>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, Deleter<OSSL_PARAM, OSSL_PARAM_free>>;
using EcdsaSigPtr = std::unique_ptr<ECDSA_SIG, Deleter<ECDSA_SIG, ECDSA_SIG_free>>;

[[noreturn]] void fail_key(const std::string& what) { throw Error(Errc::invalid_key, what); }

Bytes bn_to_bytes(const BIGNUM* bn, std::size_t pad = 0) {
  Bytes out(pad ? pad : static_cast<std::size_t>(BN_num_bytes(bn)));
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(out.size())) < 0) fail_key("bignum too large");
  return out;
}

Bytes decode_member(const Json& jwk, const char* name) {
  if (!jwk.contains(name) || !jwk[name].is_string()) fail_key(std::string("missing member ") + name);
  auto bytes = base64url_decode(jwk[name].get<std::string>());
  if (!bytes || bytes->empty()) fail_key(std::string("bad base64url in member ") + name);
  return *bytes;
}

SignatureAlgorithm algorithm_of(const EVP_PKEY* key) {
  if (EVP_PKEY_is_a(key, "RSA")) {
    if (EVP_PKEY_get_bits(key) < kMinRsaBits) fail_key("RSA modulus shorter than 2048 bits");
    return SignatureAlgorithm::rs256;
  }
  if (EVP_PKEY_is_a(key, "EC")) {
    char group[64] = {};
    std::size_t len = 0;
    if (!EVP_PKEY_get_utf8_string_param(key, OSSL_PKEY_PARAM_GROUP_NAME, group, sizeof group, &len) ||
        std::string_view(group) != "prime256v1") {
      fail_key("EC keys must use P-256");
    }
    return SignatureAlgorithm::es256;
  }
  throw Error(Errc::unsupported_algorithm, "key type is neither RSA nor EC");
}

Json export_public_jwk(const EVP_PKEY* key, SignatureAlgorithm alg) {
  if (alg == SignatureAlgorithm::rs256) {
    BIGNUM* n = nullptr;
    BIGNUM* e = nullptr;
    if (!EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_RSA_N, &n) ||
        !EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_RSA_E, &e)) {
      BN_free(n);
      fail_key("cannot export RSA parameters");
    }
    BnPtr np(n), ep(e);
    return Json{{"kty", "RSA"}, {"n", base64url_encode(bn_to_bytes(n))}, {"e", base64url_encode(bn_to_bytes(e))}};
  }
  BIGNUM* x = nullptr;
  BIGNUM* y = nullptr;
  if (!EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_EC_PUB_X, &x) ||
      !EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_EC_PUB_Y, &y)) {
    BN_free(x);
    fail_key("cannot export EC point");
  }
  BnPtr xp(x), yp(y);
  return Json{{"kty", "EC"},
              {"crv", "P-256"},
              {"x", base64url_encode(bn_to_bytes(x, kP256CoordBytes))},
              {"y", base64url_encode(bn_to_bytes(y, kP256CoordBytes))}};
}

std::shared_ptr<EVP_PKEY> import_public(const Json& jwk, SignatureAlgorithm& alg) {
  if (!jwk.is_object() || !jwk.contains("kty") || !jwk["kty"].is_string()) fail_key("JWK without kty");
  const auto kty = jwk["kty"].get<std::string>();
  ParamBldPtr bld(OSSL_PARAM_BLD_new());
  const char* type = nullptr;
  Bytes point;
  BnPtr n, e;
  if (kty == "RSA") {
    alg = SignatureAlgorithm::rs256;
    type = "RSA";
    const auto nb = decode_member(jwk, "n");
    const auto eb = decode_member(jwk, "e");
    n.reset(BN_bin2bn(nb.data(), static_cast<int>(nb.size()), nullptr));
    e.reset(BN_bin2bn(eb.data(), static_cast<int>(eb.size()), nullptr));
    if (!n || !e || !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get())) {
      fail_key("cannot build RSA parameters");
    }
  } else if (kty == "EC") {
    alg = SignatureAlgorithm::es256;
    type = "EC";
    if (!jwk.contains("crv") || jwk["crv"] != "P-256") fail_key("EC keys must use P-256");
    const auto x = decode_member(jwk, "x");
    const auto y = decode_member(jwk, "y");
    if (x.size() != kP256CoordBytes || y.size() != kP256CoordBytes) fail_key("P-256 coordinates must be 32 bytes");
    point.push_back(0x04);
    point.insert(point.end(), x.begin(), x.end());
    point.insert(point.end(), y.begin(), y.end());
    if (!OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, "P-256", 0) ||
        !OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, point.data(), point.size())) {
      fail_key("cannot build EC parameters");
    }
  } else {
    throw Error(Errc::unsupported_algorithm, "unsupported kty " + kty);
  }
  ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, type, nullptr));
  EVP_PKEY* raw = nullptr;
  if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) <= 0 ||
      EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) <= 0) {
    fail_key("key material rejected");
  }
  auto key = own(raw);
  PkeyCtxPtr check(EVP_PKEY_CTX_new_from_pkey(nullptr, key.get(), nullptr));
  if (!check || EVP_PKEY_public_check(check.get()) <= 0) fail_key("public key failed validation");
  if (algorithm_of(key.get()) != alg) fail_key("key type mismatch");
  return key;
}

// JWS ES256 signatures are the raw 64-byte r||s concatenation; OpenSSL speaks DER.
Bytes der_to_raw(const Bytes& der) {
  const unsigned char* p = der.data();
  EcdsaSigPtr sig(d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())));
  if (!sig) throw Error(Errc::invalid_key, "bad ECDSA signature encoding");
  const BIGNUM* r = nullptr;
  const BIGNUM* s = nullptr;
  ECDSA_SIG_get0(sig.get(), &r, &s);
  Bytes out = bn_to_bytes(r, kP256CoordBytes);
  const Bytes sb = bn_to_bytes(s, kP256CoordBytes);
  out.insert(out.end(), sb.begin(), sb.end());
  return out;
}

std::optional<Bytes> raw_to_der(std::span<const std::uint8_t> raw) {
  if (raw.size() != 2 * kP256CoordBytes) return std::nullopt;
  EcdsaSigPtr sig(ECDSA_SIG_new());
  BIGNUM* r = BN_bin2bn(raw.data(), kP256CoordBytes, nullptr);
  BIGNUM* s = BN_bin2bn(raw.data() + kP256CoordBytes, kP256CoordBytes, nullptr);
  if (!sig || !r || !s || !ECDSA_SIG_set0(sig.get(), r, s)) {
    BN_free(r);
    BN_free(s);
    return std::nullopt;
  }
  const int len = i2d_ECDSA_SIG(sig.get(), nullptr);
  if (len <= 0) return std::nullopt;
  Bytes der(static_cast<std::size_t>(len));
  unsigned char* out = der.data();
  i2d_ECDSA_SIG(sig.get(), &out);
  return der;
}

}  // namespace

std::string_view to_string(SignatureAlgorithm alg) noexcept {
  return alg == SignatureAlgorithm::rs256 ? "RS256" : "ES256";
}

SignatureAlgorithm parse_algorithm(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "RS256") return SignatureAlgorithm::rs256;
  if (upper == "ES256") return SignatureAlgorithm::es256;
  throw Error(Errc::unsupported_algorithm, "unsupported algorithm " + std::string(name));
}

PublicKey PublicKey::from_jwk(const Json& jwk) {
  if (has_private_members(jwk)) throw Error(Errc::private_material_in_key, "JWK carries private members");
  SignatureAlgorithm alg{};
  auto key = import_public(jwk, alg);
  return PublicKey(key, alg, export_public_jwk(key.get(), alg));
}

std::string PublicKey::thumbprint() const { return jwk_thumbprint(jwk_); }

bool PublicKey::verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature) const {
  Bytes der;
  std::span<const std::uint8_t> sig = signature;
  if (alg_ == SignatureAlgorithm::es256) {
    auto converted = raw_to_der(signature);
    if (!converted) return false;
    der = std::move(*converted);
    sig = der;
  }
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key_.get()) <= 0) return false;
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) == 1;
}

bool PublicKey::verify(std::string_view message, std::span<const std::uint8_t> signature) const {
  return verify(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()),
                signature);
}

PrivateKey PrivateKey::generate(SignatureAlgorithm alg) {
  EVP_PKEY* raw = alg == SignatureAlgorithm::rs256 ? EVP_RSA_gen(static_cast<unsigned>(kMinRsaBits))
                                                   : EVP_EC_gen("P-256");
  if (!raw) throw Error(Errc::invalid_key, "key generation failed");
  auto key = own(raw);
  return PrivateKey(key, PublicKey(key, alg, export_public_jwk(key.get(), alg)));
}

PrivateKey PrivateKey::from_pem(std::string_view pem) {
  BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  EVP_PKEY* raw = bio ? PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr) : nullptr;
  if (!raw) fail_key("cannot parse PEM private key");
  auto key = own(raw);
  const auto alg = algorithm_of(key.get());
  return PrivateKey(key, PublicKey(key, alg, export_public_jwk(key.get(), alg)));
}

std::string PrivateKey::to_pem() const {
  BioPtr bio(BIO_new(BIO_s_mem()));
  if (!bio || !PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr)) {
    fail_key("cannot write PEM");
  }
  char* data = nullptr;
  const long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<std::size_t>(len));
}

Bytes PrivateKey::sign(std::span<const std::uint8_t> message) const {
  MdCtxPtr ctx(EVP_MD_CTX_new());
  std::size_t len = 0;
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key_.get()) <= 0 ||
      EVP_DigestSign(ctx.get(), nullptr, &len, message.data(), message.size()) <= 0) {
    fail_key("signing failed");
  }
  Bytes sig(len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) <= 0) fail_key("signing failed");
  sig.resize(len);
  return algorithm() == SignatureAlgorithm::es256 ? der_to_raw(sig) : sig;
}

Bytes PrivateKey::sign(std::string_view message) const {
  return sign(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()));
}

std::string jwk_thumbprint(const Json& jwk) {
  if (!jwk.is_object() || !jwk.contains("kty")) fail_key("JWK without kty");
  Json required;
  const auto kty = jwk["kty"].get<std::string>();
  if (kty == "RSA") {
    required = {{"e", jwk.at("e")}, {"kty", "RSA"}, {"n", jwk.at("n")}};
  } else if (kty == "EC") {
    required = {{"crv", jwk.at("crv")}, {"kty", "EC"}, {"x", jwk.at("x")}, {"y", jwk.at("y")}};
  } else {
    throw Error(Errc::unsupported_algorithm, "unsupported kty " + kty);
  }
  // nlohmann::json objects are key-ordered, so dump() yields the canonical form.
  return base64url_encode(sha256(required.dump()));
}

bool has_private_members(const Json& jwk) {
  if (!jwk.is_object()) return false;
  for (const char* m : {"d", "p", "q", "dp", "dq", "qi", "oth", "k"}) {
    if (jwk.contains(m)) return true;
  }
  return false;
}

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) throw std::runtime_error("RAND_bytes failed");
  return out;
}

Bytes sha256(std::string_view data) {
  Bytes out(32);
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr)) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

}  // namespace oidc2
