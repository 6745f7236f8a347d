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
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "oidc2/clock.hpp"
#include "oidc2/crypto.hpp"
#include "oidc2/error.hpp"
#include "oidc2/token.hpp"

namespace oidc2 {

inline constexpr std::size_t kPopNonceBytes = 16;
inline constexpr std::int64_t kDefaultNonceTtlSeconds = 30;
inline constexpr std::int64_t kDefaultMaxSkewSeconds = 15;

/// Client-generated proof of possession attached to an ICT Request: a
/// signature over "<nonce>.<timestamp>" with the client private key.
struct ProofOfPossession {
  std::string nonce;  // base64url of 16 random bytes
  UnixTime timestamp = 0;
  Bytes signature;

  /// Wire form {"nonce": ..., "ts": ..., "sig": ...}.
  Json to_json() const;
  /// Throws Error(malformed_pop).
  static ProofOfPossession from_json(const Json& j);
};

/// Exact bytes the client signs.
std::string pop_signing_input(std::string_view nonce, UnixTime timestamp);

/// Nonces seen within the last ttl seconds. An entry inserted at t is live
/// through t + ttl and expired from t + ttl + 1 on. Thread-safe.
class NonceCache {
 public:
  explicit NonceCache(std::int64_t ttl_seconds = kDefaultNonceTtlSeconds) : ttl_(ttl_seconds) {}

  NonceCache(const NonceCache&) = delete;
  NonceCache& operator=(const NonceCache&) = delete;

  std::int64_t ttl_seconds() const noexcept { return ttl_; }

  bool contains(std::string_view nonce, UnixTime now) const;

  /// Atomic check-and-insert. Returns false (and leaves the cache alone) if
  /// the nonce is live.
  bool insert_if_absent(std::string_view nonce, UnixTime now);

  /// Drops expired entries and returns how many were removed.
  std::size_t purge_expired(UnixTime now);

  std::size_t size() const;

 private:
  bool live(UnixTime inserted, UnixTime now) const noexcept { return now - inserted <= ttl_; }

  std::int64_t ttl_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, UnixTime> entries_;
  std::size_t inserts_since_purge_ = 0;
};

std::size_t purge_expired(NonceCache& cache, const Clock& clock);

enum class PopVerdict { accepted, stale_timestamp, replayed_nonce, bad_signature, malformed_pop };

/// Maps a rejection onto its protocol error code. Precondition: not accepted.
Errc to_errc(PopVerdict verdict);
std::string_view to_string(PopVerdict verdict);

ProofOfPossession create_pop(const KeyPairDescriptor& client_key, const Clock& clock);

/// Accepts iff the timestamp is within max_skew_seconds of the clock
/// (inclusive), the signature verifies, and the nonce is not live in the
/// cache. On acceptance the nonce is recorded in the same critical section
/// as the replay check; on rejection the cache is untouched.
PopVerdict verify_pop(const ProofOfPossession& pop, const PublicKey& client_public_key, NonceCache& cache,
                      const Clock& clock, std::int64_t max_skew_seconds = kDefaultMaxSkewSeconds);

/// Same, importing the key from a JWK first. Unusable keys yield malformed_pop.
PopVerdict verify_pop(const ProofOfPossession& pop, const Json& client_public_jwk, NonceCache& cache,
                      const Clock& clock, std::int64_t max_skew_seconds = kDefaultMaxSkewSeconds);

}  // namespace oidc2
