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

#include <random>

#include <openssl/evp.h>

#include "oidc2/base64url.hpp"
#include "oidc2/crypto.hpp"
#include "oidc2/token.hpp"
#include "test_support.hpp"

namespace oidc2 {
namespace {

using testing::error_of;

// Standard base64 via OpenSSL, translated to the URL alphabet. Used as an
// independent reference for our codec.
std::string reference_b64url(const std::string& in) {
  std::string out(4 * ((in.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  out.resize(n);
  for (auto& c : out) c = c == '+' ? '-' : c == '/' ? '_' : c;
  while (!out.empty() && out.back() == '=') out.pop_back();
  return out;
}

std::string reference_b64url_decode(std::string in) {
  for (auto& c : in) c = c == '-' ? '+' : c == '_' ? '/' : c;
  const auto pad = (4 - in.size() % 4) % 4;
  in.append(pad, '=');
  std::string out(in.size(), '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  out.resize(n - pad);
  return out;
}

TEST(Base64Url, MatchesReferenceEncoder) {
  std::mt19937 rng(7);
  for (int len = 0; len < 64; ++len) {
    std::string s(len, '\0');
    for (auto& c : s) c = static_cast<char>(rng());
    const auto enc = base64url_encode(s);
    EXPECT_EQ(enc, reference_b64url(s));
    const auto dec = base64url_decode(enc);
    ASSERT_TRUE(dec);
    EXPECT_EQ(to_string(*dec), s);
  }
}

TEST(Base64Url, RejectsNonCanonicalInput) {
  EXPECT_FALSE(base64url_decode("QQ=="));  // padding
  EXPECT_FALSE(base64url_decode("QR"));    // non-zero trailing bits
  EXPECT_FALSE(base64url_decode("Q"));     // impossible length
  EXPECT_FALSE(base64url_decode("a+b/"));  // standard alphabet
  EXPECT_TRUE(base64url_decode("QQ"));
}

TEST(Keygen, Rs256Has2048BitModulus) {
  const auto key = generate_signing_keypair(SignatureAlgorithm::rs256, KeyKind::ephemeral);
  const auto n = base64url_decode(key.public_part.jwk()["n"].get<std::string>());
  ASSERT_TRUE(n);
  EXPECT_EQ(n->size() * 8, 2048u);
  EXPECT_EQ(key.public_part.jwk()["kty"], "RSA");
}

TEST(Keygen, SignVerifyRoundTripAndDistinctKeys) {
  for (auto alg : {SignatureAlgorithm::rs256, SignatureAlgorithm::es256}) {
    const auto a = generate_signing_keypair(alg, KeyKind::ephemeral);
    const auto b = generate_signing_keypair(alg, KeyKind::ephemeral);
    EXPECT_NE(a.public_part.thumbprint(), b.public_part.thumbprint());
    const auto sig = a.private_part->sign(std::string_view("message"));
    EXPECT_TRUE(a.public_part.verify(std::string_view("message"), sig));
    EXPECT_FALSE(a.public_part.verify(std::string_view("messagf"), sig));
    EXPECT_FALSE(b.public_part.verify(std::string_view("message"), sig));
  }
}

TEST(Keygen, RejectsSymmetricAndBadKindCombos) {
  EXPECT_EQ(error_of([] { generate_signing_keypair("HS256", KeyKind::ephemeral); }), Errc::unsupported_algorithm);
  EXPECT_EQ(error_of([] { generate_signing_keypair("none", KeyKind::ephemeral); }), Errc::unsupported_algorithm);
  EXPECT_TRUE(error_of([] { generate_signing_keypair(SignatureAlgorithm::es256, KeyKind::long_term); }));
  EXPECT_TRUE(error_of([] {
    generate_signing_keypair(SignatureAlgorithm::es256, KeyKind::ephemeral, std::string("http://rev"));
  }));
}

TEST(Jwk, ThumbprintMatchesRfc7638Example) {
  // RFC 7638 section 3.1.
  const Json jwk = {
      {"kty", "RSA"},
      {"n",
       "0vx7agoebGcQSuuPiLJXZptN9nndrQmbXEps2aiAFbWhM78LhWx4cbbfAAtVT86zwu1RK7aPFFxuhDR1L6tSoc_BJECPebWKRXjBZCiFV4n3oknjh"
       "Mstn64tZ_2W-5JsGY4Hc5n9yBXArwl93lqt7_RN5w6Cf0h4QyQ5v-65YGjQR0_FDW2QvzqY368QQMicAtaSqzs8KJZgnYb9c7d0zgdAZHzu6qMQv"
       "RL5hajrn1n91CbOpbISD08qNLyrdkt-bFTWhAI4vMQFh6WeZu0fM4lFd2NcRwr3XPksINHaQ-G_xBniIqbw0Ls1jF44-csFCur-kEgU8awapJzKn"
       "qDKgw"},
      {"e", "AQAB"},
      {"alg", "RS256"},
      {"kid", "2011-04-29"}};
  EXPECT_EQ(jwk_thumbprint(jwk), "NzbLsXh8uDCcd-6MNwXF4W_7noWXFZAfHkxZsRGC9Xs");
}

TEST(Jwk, PrivateMembersRejected) {
  const auto key = PrivateKey::generate(SignatureAlgorithm::es256);
  Json jwk = key.public_key().jwk();
  EXPECT_FALSE(has_private_members(jwk));
  jwk["d"] = "AAAA";
  EXPECT_TRUE(has_private_members(jwk));
  EXPECT_EQ(error_of([&] { PublicKey::from_jwk(jwk); }), Errc::private_material_in_key);
}

TEST(Jwk, PemRoundTrip) {
  const auto key = PrivateKey::generate(SignatureAlgorithm::es256);
  const auto again = PrivateKey::from_pem(key.to_pem());
  EXPECT_EQ(again.public_key(), key.public_key());
}

class TokenTest : public ::testing::Test {
 protected:
  ManualClock clock;
  KeyPairDescriptor op = generate_signing_keypair(SignatureAlgorithm::rs256, KeyKind::ephemeral);
  KeyPairDescriptor client = testing::client_key();

  IctClaims claims(std::int64_t validity = 300) {
    return build_ict_claims(Json{{"sub", "alice-sub-1"}, {"name", "Alice"}, {"email", "a@example.org"}}, "alice-sub-1",
                            "https://op.example", client.public_part.jwk(), {"email"}, validity, clock);
  }
};

TEST_F(TokenTest, ValidityBounds) {
  const auto c = claims(300);
  EXPECT_EQ(c.expires_at - c.issued_at, 300);
  EXPECT_EQ(c.issued_at, clock.now());
  EXPECT_EQ(c.not_before, c.issued_at);
  EXPECT_FALSE(c.identity_claims.contains("sub"));
  EXPECT_EQ(claims(3600).expires_at - clock.now(), 3600);
  EXPECT_EQ(error_of([&] { claims(3601); }), Errc::validity_too_long);
  EXPECT_TRUE(error_of([&] { claims(0); }));
}

TEST_F(TokenTest, BuildPreconditions) {
  EXPECT_NE(claims().token_id, claims().token_id);
  EXPECT_EQ(error_of([&] {
              build_ict_claims(Json::object(), "s", "https://op", client.public_part.jwk(), {}, 300, clock);
            }),
            Errc::empty_contexts);
  Json with_private = client.public_part.jwk();
  with_private["d"] = "AAAA";
  EXPECT_EQ(error_of([&] { build_ict_claims(Json::object(), "s", "https://op", with_private, {"vc"}, 300, clock); }),
            Errc::private_material_in_key);
}

TEST_F(TokenTest, SignVerifyRoundTrip) {
  const auto c = claims();
  const auto token = sign_token(c, op, "kid-1");
  EXPECT_EQ(token.header()["alg"], "RS256");
  EXPECT_EQ(token.header()["kid"], "kid-1");
  EXPECT_EQ(verify_token_signature(token, op.public_part, clock), c);
  EXPECT_EQ(decode_unverified(token.serialized()).second, c);
  EXPECT_EQ(verify_token_signature(CompactToken::parse(token.serialized()), op.public_part, clock), c);
}

TEST_F(TokenTest, HeaderDecodesIndependently) {
  const auto serialized = sign_token(claims(), op, "k").serialized();
  const auto header_b64 = serialized.substr(0, serialized.find('.'));
  const auto header = Json::parse(reference_b64url_decode(header_b64));
  EXPECT_EQ(header["typ"], "ict+jwt");
  EXPECT_EQ(header["alg"], "RS256");
}

TEST_F(TokenTest, WrongKeyAndMissingPrivateKey) {
  const auto token = sign_token(claims(), op, "k");
  const auto other = generate_signing_keypair(SignatureAlgorithm::rs256, KeyKind::ephemeral);
  EXPECT_EQ(error_of([&] { verify_token_signature(token, other.public_part, clock); }), Errc::signature_invalid);
  KeyPairDescriptor public_only{op.public_part, std::nullopt};
  EXPECT_EQ(error_of([&] { sign_token(claims(), public_only, "k"); }), Errc::missing_private_key);
}

TEST_F(TokenTest, LifetimeWindowIsInclusive) {
  const auto token = sign_token(claims(300), op, "k");
  const auto start = clock.now();
  clock.set(start + 300);
  EXPECT_NO_THROW(verify_token_signature(token, op.public_part, clock));
  clock.set(start + 301);
  EXPECT_EQ(error_of([&] { verify_token_signature(token, op.public_part, clock); }), Errc::token_expired);
  clock.set(start - 1);
  EXPECT_EQ(error_of([&] { verify_token_signature(token, op.public_part, clock); }), Errc::token_not_yet_valid);
}

TEST_F(TokenTest, WrongTypeRejected) {
  Json payload = claims().to_json();
  const auto id_token = CompactToken::sign(Json{{"typ", "JWT"}, {"kid", "k"}}, payload, *op.private_part);
  EXPECT_EQ(error_of([&] { verify_token_signature(id_token, op.public_part, clock); }), Errc::wrong_token_type);
}

TEST_F(TokenTest, DecodeUnverified) {
  const auto serialized = sign_token(claims(), op, "k").serialized();
  EXPECT_EQ(decode_unverified(serialized).second.issuer, "https://op.example");
  EXPECT_EQ(error_of([] { decode_unverified("abc.def"); }), Errc::malformed_token);
  auto corrupted = serialized;
  corrupted.back() = corrupted.back() == 'A' ? 'B' : 'A';
  EXPECT_EQ(decode_unverified(corrupted).second.subject, "alice-sub-1");
  corrupted.back() = '!';
  EXPECT_EQ(decode_unverified(corrupted).second.subject, "alice-sub-1");
  EXPECT_THROW(CompactToken::parse(corrupted), Error);
}

TEST_F(TokenTest, SingleByteTamperAlwaysDetected) {
  for (auto alg : {SignatureAlgorithm::rs256, SignatureAlgorithm::es256}) {
    const auto key = generate_signing_keypair(alg, KeyKind::ephemeral);
    const auto serialized = sign_token(claims(), key, "k").serialized();
    std::mt19937 rng(42);
    for (int i = 0; i < 300; ++i) {
      auto mutated = serialized;
      const auto pos = rng() % mutated.size();
      char replacement;
      do replacement = static_cast<char>(rng() % 256);
      while (replacement == mutated[pos]);
      mutated[pos] = replacement;
      bool accepted = false;
      try {
        verify_token_signature(CompactToken::parse(mutated), key.public_part, clock);
        accepted = true;
      } catch (const Error&) {
      }
      EXPECT_FALSE(accepted) << "mutation at " << pos;
    }
  }
}

}  // namespace
}  // namespace oidc2
