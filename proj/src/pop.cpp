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

#include "oidc2/pop.hpp"

#include "oidc2/error.hpp"

namespace oidc2 {
namespace {

constexpr std::size_t kPurgeEvery = 1024;

}  // namespace

Json ProofOfPossession::to_json() const {
  return Json{{"nonce", nonce}, {"ts", timestamp}, {"sig", base64url_encode(signature)}};
}

ProofOfPossession ProofOfPossession::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("nonce") || !j["nonce"].is_string() || !j.contains("ts") ||
      !j["ts"].is_number_integer() || !j.contains("sig") || !j["sig"].is_string()) {
    throw Error(Errc::malformed_pop, "pop must be {nonce: string, ts: integer, sig: string}");
  }
  auto sig = base64url_decode(j["sig"].get<std::string>());
  if (!sig) throw Error(Errc::malformed_pop, "sig is not base64url");
  return ProofOfPossession{j["nonce"].get<std::string>(), j["ts"].get<UnixTime>(), std::move(*sig)};
}

std::string pop_signing_input(std::string_view nonce, UnixTime timestamp) {
  std::string out(nonce);
  out += '.';
  out += std::to_string(timestamp);
  return out;
}

bool NonceCache::contains(std::string_view nonce, UnixTime now) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(std::string(nonce));
  return it != entries_.end() && live(it->second, now);
}

bool NonceCache::insert_if_absent(std::string_view nonce, UnixTime now) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = entries_.try_emplace(std::string(nonce), now);
  if (!inserted) {
    if (live(it->second, now)) return false;
    it->second = now;
  }
  if (++inserts_since_purge_ >= kPurgeEvery) {
    inserts_since_purge_ = 0;
    std::erase_if(entries_, [&](const auto& e) { return !live(e.second, now); });
  }
  return true;
}

std::size_t NonceCache::purge_expired(UnixTime now) {
  std::lock_guard lock(mu_);
  return std::erase_if(entries_, [&](const auto& e) { return !live(e.second, now); });
}

std::size_t NonceCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::size_t purge_expired(NonceCache& cache, const Clock& clock) { return cache.purge_expired(clock.now()); }

Errc to_errc(PopVerdict verdict) {
  switch (verdict) {
    case PopVerdict::stale_timestamp: return Errc::stale_timestamp;
    case PopVerdict::replayed_nonce: return Errc::replayed_nonce;
    case PopVerdict::bad_signature: return Errc::bad_signature;
    case PopVerdict::malformed_pop: return Errc::malformed_pop;
    case PopVerdict::accepted: break;
  }
  throw std::logic_error("accepted PoP has no error code");
}

std::string_view to_string(PopVerdict verdict) {
  return verdict == PopVerdict::accepted ? "accepted" : to_string(to_errc(verdict));
}

ProofOfPossession create_pop(const KeyPairDescriptor& client_key, const Clock& clock) {
  if (!client_key.private_part) throw Error(Errc::missing_private_key, "client key has no private part");
  ProofOfPossession pop;
  pop.nonce = base64url_encode(random_bytes(kPopNonceBytes));
  pop.timestamp = clock.now();
  pop.signature = client_key.private_part->sign(pop_signing_input(pop.nonce, pop.timestamp));
  return pop;
}

PopVerdict verify_pop(const ProofOfPossession& pop, const PublicKey& client_public_key, NonceCache& cache,
                      const Clock& clock, std::int64_t max_skew_seconds) {
  const auto nonce = base64url_decode(pop.nonce);
  if (!nonce || nonce->size() != kPopNonceBytes) return PopVerdict::malformed_pop;

  const auto now = clock.now();
  const auto skew = now > pop.timestamp ? now - pop.timestamp : pop.timestamp - now;
  if (skew > max_skew_seconds) return PopVerdict::stale_timestamp;

  if (!client_public_key.verify(pop_signing_input(pop.nonce, pop.timestamp), pop.signature)) {
    return PopVerdict::bad_signature;
  }
  return cache.insert_if_absent(pop.nonce, now) ? PopVerdict::accepted : PopVerdict::replayed_nonce;
}

PopVerdict verify_pop(const ProofOfPossession& pop, const Json& client_public_jwk, NonceCache& cache,
                      const Clock& clock, std::int64_t max_skew_seconds) {
  try {
    return verify_pop(pop, PublicKey::from_jwk(client_public_jwk), cache, clock, max_skew_seconds);
  } catch (const Error&) {
    return PopVerdict::malformed_pop;
  }
}

}  // namespace oidc2
