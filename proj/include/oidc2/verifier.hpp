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
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "oidc2/clock.hpp"
#include "oidc2/error.hpp"
#include "oidc2/token.hpp"

namespace oidc2 {

/// How far an authenticating user trusts an OpenID Provider.
enum class OpClass { insecure, authoritative, verifying };

std::string_view to_string(OpClass c) noexcept;
/// Accepts "insecure", "aop"/"authoritative", "vop"/"verifying".
OpClass parse_op_class(std::string_view text);

struct TrustEntry {
  OpClass klass = OpClass::insecure;
  std::set<std::string> authoritative_claims;
  std::set<std::string> verified_claims;
  int rank = 0;

  /// Insecure entries carry no claims; any other class is authoritative
  /// for "sub".
  TrustEntry normalized() const;
  friend bool operator==(const TrustEntry&, const TrustEntry&) = default;
};

/// The authenticating user's own whitelist of OPs, keyed by issuer URL.
class TrustPolicy {
 public:
  TrustPolicy() = default;

  void set(const std::string& issuer, const TrustEntry& entry) { entries_[issuer] = entry.normalized(); }
  bool contains(const std::string& issuer) const { return entries_.count(issuer) > 0; }
  const std::map<std::string, TrustEntry>& entries() const noexcept { return entries_; }

  /// {"default": "insecure", "issuers": [{"iss", "class", "authoritative_claims",
  /// "verified_claims", "rank"}]}
  static TrustPolicy from_json(const Json& j);
  Json to_json() const;
  static TrustPolicy load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::map<std::string, TrustEntry> entries_;
};

/// Entry for `issuer`, or an insecure default for unknown issuers.
TrustEntry classify_op(const std::string& issuer, const TrustPolicy& policy);

enum class Provenance { authoritative, verified, uncertified };
std::string_view to_string(Provenance p) noexcept;

struct CertifiedClaim {
  Json value;
  Provenance provenance = Provenance::uncertified;
};

struct AuthenticationResult {
  bool accepted = false;
  std::string issuer;
  std::string subject;
  std::map<std::string, CertifiedClaim> claims;
  Json confirmation_key;
  KeyKind key_kind = KeyKind::ephemeral;
  std::optional<std::string> revocation_server;
  ContextSet contexts;
  UnixTime expires_at = 0;
  int rank = 0;
  std::optional<Errc> rejection_reason;
  std::string detail;

  static AuthenticationResult rejected(Errc reason, std::string detail);
  Json to_json() const;
};

/// Resolves (issuer, kid) to an OP verification key.
using KeyLookup = std::function<std::optional<PublicKey>(const std::string& issuer, const std::string& kid)>;

/// Lookup over a fixed key table.
KeyLookup static_key_lookup(std::map<std::pair<std::string, std::string>, PublicKey> keys);

/// Fetches <issuer>/.well-known/jwks.json and caches each issuer's key set
/// for ttl seconds. Unknown kids trigger at most one refetch per lookup.
class JwksKeyCache {
 public:
  using Fetcher = std::function<std::optional<Json>(const std::string& jwks_url)>;

  explicit JwksKeyCache(const Clock& clock, std::int64_t ttl_seconds = 300, Fetcher fetcher = {});

  std::optional<PublicKey> lookup(const std::string& issuer, const std::string& kid);
  KeyLookup as_lookup();
  std::size_t fetch_count() const;

 private:
  struct Entry {
    UnixTime fetched_at = 0;
    std::map<std::string, PublicKey> keys;
  };
  std::optional<Entry> fetch(const std::string& issuer);

  const Clock& clock_;
  std::int64_t ttl_;
  Fetcher fetcher_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> cache_;
  std::size_t fetches_ = 0;
};

/// Parses a JWKS document into kid -> key, skipping keys it cannot use.
std::map<std::string, PublicKey> parse_jwks(const Json& jwks);

enum class RevocationStatus { good, revoked };

/// GET <revocation_server>/revoked, a JSON array of key thumbprints.
/// Throws Error(revocation_unreachable) if the list cannot be obtained.
RevocationStatus check_revocation(const std::string& revocation_server, const std::string& key_thumbprint);

using RevocationChecker = std::function<RevocationStatus(const std::string& server, const std::string& thumbprint)>;

/// Asked when the issuer is absent from the policy. Returning true trusts
/// the issuer for this verification only (authoritative for sub, rank 0).
using TrustPrompt = std::function<bool(const std::string& issuer, const IctClaims& unverified_claims)>;

struct VerifyOptions {
  RevocationChecker revocation = check_revocation;
  TrustPrompt on_unknown_issuer;
};

/// Full authenticating-party check: issuer trust, key lookup, typ,
/// signature, validity window at clock.now(), context, and revocation for
/// long-term keys (fail-closed).
AuthenticationResult verify_ict(std::string_view token, const KeyLookup& op_keys, const TrustPolicy& policy,
                                std::string_view expected_context, const Clock& clock,
                                const VerifyOptions& options = {});

struct MultiIctSelection {
  AuthenticationResult result;
  std::optional<std::size_t> chosen_index;
  std::vector<AuthenticationResult> per_token;
};

/// Verifies every token and picks the highest-ranked acceptable one, ties
/// going to the earliest expiry and then to the lexicographically smallest
/// token. All tokens must share one confirmation key, and it must equal
/// `proven_key` when the caller has already checked possession of a key.
MultiIctSelection select_from_multiple(std::span<const std::string> tokens, const KeyLookup& op_keys,
                                       const TrustPolicy& policy, std::string_view expected_context,
                                       const Clock& clock, const std::optional<PublicKey>& proven_key = std::nullopt,
                                       const VerifyOptions& options = {});

}  // namespace oidc2
