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

#include <algorithm>
#include <random>
#include <thread>

#include "oidc2/pop.hpp"
#include "test_support.hpp"

namespace oidc2 {
namespace {

class PopTest : public ::testing::Test {
 protected:
  ManualClock clock;
  KeyPairDescriptor client = testing::client_key();
  NonceCache cache;
};

TEST_F(PopTest, SigningInputIsNonceDotTimestamp) {
  EXPECT_EQ(pop_signing_input("AAAA", 1700000000), std::string("AAAA") + "." + "1700000000");
}

TEST_F(PopTest, RoundTripAndFreshNonces) {
  const auto pop = create_pop(client, clock);
  EXPECT_EQ(pop.timestamp, clock.now());
  EXPECT_EQ(base64url_decode(pop.nonce)->size(), kPopNonceBytes);
  EXPECT_NE(pop.nonce, create_pop(client, clock).nonce);
  EXPECT_EQ(verify_pop(pop, client.public_part, cache, clock), PopVerdict::accepted);
  EXPECT_EQ(verify_pop(ProofOfPossession::from_json(pop.to_json()), client.public_part.jwk(), cache, clock),
            PopVerdict::replayed_nonce);
}

TEST_F(PopTest, SkewBoundaries) {
  const auto now = clock.now();
  for (std::int64_t offset : {-16, 16}) {
    clock.set(now + offset);
    const auto pop = create_pop(client, clock);
    clock.set(now);
    EXPECT_EQ(verify_pop(pop, client.public_part, cache, clock), PopVerdict::stale_timestamp) << offset;
  }
  for (std::int64_t offset : {-15, 15}) {
    clock.set(now + offset);
    const auto pop = create_pop(client, clock);
    clock.set(now);
    EXPECT_EQ(verify_pop(pop, client.public_part, cache, clock), PopVerdict::accepted) << offset;
  }
}

TEST_F(PopTest, SkewMonotone) {
  const auto now = clock.now();
  bool rejected_before = false;
  for (std::int64_t skew = 0; skew <= 40; ++skew) {
    clock.set(now - skew);
    const auto pop = create_pop(client, clock);
    clock.set(now);
    const bool rejected = verify_pop(pop, client.public_part, cache, clock) != PopVerdict::accepted;
    if (rejected_before) EXPECT_TRUE(rejected) << skew;
    rejected_before = rejected_before || rejected;
  }
  EXPECT_TRUE(rejected_before);
}

TEST_F(PopTest, NonceReusableAfterTtl) {
  const auto pop = create_pop(client, clock);
  ASSERT_EQ(verify_pop(pop, client.public_part, cache, clock), PopVerdict::accepted);
  clock.advance(30);
  auto again = pop;
  again.timestamp = clock.now();
  again.signature = client.private_part->sign(pop_signing_input(again.nonce, again.timestamp));
  EXPECT_EQ(verify_pop(again, client.public_part, cache, clock), PopVerdict::replayed_nonce);
  clock.advance(1);
  again.timestamp = clock.now();
  again.signature = client.private_part->sign(pop_signing_input(again.nonce, again.timestamp));
  EXPECT_EQ(verify_pop(again, client.public_part, cache, clock), PopVerdict::accepted);
}

TEST_F(PopTest, RejectionDoesNotTouchCache) {
  auto pop = create_pop(client, clock);
  pop.signature[0] ^= 1;
  EXPECT_EQ(verify_pop(pop, client.public_part, cache, clock), PopVerdict::bad_signature);
  EXPECT_EQ(cache.size(), 0u);

  const auto other = testing::client_key();
  EXPECT_EQ(verify_pop(create_pop(client, clock), other.public_part, cache, clock), PopVerdict::bad_signature);
  EXPECT_EQ(cache.size(), 0u);

  ProofOfPossession malformed{"not!base64", clock.now(), {1, 2, 3}};
  EXPECT_EQ(verify_pop(malformed, client.public_part, cache, clock), PopVerdict::malformed_pop);
  malformed.nonce = "AAAA";
  EXPECT_EQ(verify_pop(malformed, client.public_part, cache, clock), PopVerdict::malformed_pop);
  EXPECT_EQ(cache.size(), 0u);
}

TEST_F(PopTest, VerdictsMapToDistinctCodes) {
  std::set<Errc> codes;
  for (auto v : {PopVerdict::stale_timestamp, PopVerdict::replayed_nonce, PopVerdict::bad_signature,
                 PopVerdict::malformed_pop}) {
    codes.insert(to_errc(v));
  }
  EXPECT_EQ(codes.size(), 4u);
  EXPECT_EQ(to_errc(PopVerdict::replayed_nonce), Errc::replayed_nonce);
}

TEST(NonceCacheTest, PurgeBoundary) {
  ManualClock clock;
  NonceCache cache(30);
  EXPECT_EQ(purge_expired(cache, clock), 0u);
  const auto t = clock.now();
  ASSERT_TRUE(cache.insert_if_absent("n", t));
  EXPECT_EQ(cache.purge_expired(t + 30), 0u);
  EXPECT_TRUE(cache.contains("n", t + 30));
  EXPECT_FALSE(cache.contains("n", t + 31));
  EXPECT_EQ(cache.purge_expired(t + 31), 1u);
  EXPECT_EQ(cache.size(), 0u);
}

// Random interleavings of submissions with random clock advances: an
// independent model tracks the last acceptance per nonce.
TEST(NonceCacheTest, ReplaySafetyProperty) {
  ManualClock clock;
  NonceCache cache;
  const auto client = testing::client_key();
  std::mt19937 rng(1234);
  std::vector<std::string> nonces;
  for (int i = 0; i < 5; ++i) nonces.push_back(create_pop(client, clock).nonce);
  std::map<std::string, UnixTime> last_accept;
  for (int step = 0; step < 400; ++step) {
    clock.advance(rng() % 4);
    if (rng() % 10 == 0) purge_expired(cache, clock);
    const auto& nonce = nonces[rng() % nonces.size()];
    ProofOfPossession pop{nonce, clock.now(), client.private_part->sign(pop_signing_input(nonce, clock.now()))};
    const auto verdict = verify_pop(pop, client.public_part, cache, clock);
    const auto it = last_accept.find(nonce);
    const bool expect_accept = it == last_accept.end() || clock.now() - it->second > 30;
    ASSERT_EQ(verdict == PopVerdict::accepted, expect_accept) << "step " << step;
    if (verdict == PopVerdict::accepted) last_accept[nonce] = clock.now();
  }
}

TEST(NonceCacheTest, ConcurrentDuplicatesAcceptedOnce) {
  FixedClock clock(1'700'000'000);
  NonceCache cache;
  const auto client = testing::client_key();
  for (int round = 0; round < 20; ++round) {
    const auto pop = create_pop(client, clock);
    std::atomic<int> accepted{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&] {
        if (verify_pop(pop, client.public_part, cache, clock) == PopVerdict::accepted) ++accepted;
      });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(accepted.load(), 1);
  }
}

}  // namespace
}  // namespace oidc2
