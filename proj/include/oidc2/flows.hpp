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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "oidc2/clock.hpp"
#include "oidc2/token.hpp"
#include "oidc2/verifier.hpp"

namespace oidc2 {

/// Recommended ICT lifetimes per application context.
inline constexpr std::int64_t kVcValiditySeconds = 300;
inline constexpr std::int64_t kImValiditySeconds = 300;
inline constexpr std::int64_t kEmailValiditySeconds = 3600;

inline constexpr std::string_view kVcContext = "vc";
inline constexpr std::string_view kImContext = "im";
inline constexpr std::string_view kEmailContext = "email";

/// Recommended validity for a context; 300 s for contexts without a
/// recommendation.
std::int64_t recommended_validity(std::string_view context);

/// "<initiator>|<responder>|<unix millis>|<64-bit random hex>". '|' and '%'
/// inside identifiers are percent-escaped.
struct SessionId {
  std::string value;

  static SessionId generate(std::string_view initiator_id, std::string_view responder_id, const Clock& clock);
  friend bool operator==(const SessionId&, const SessionId&) = default;
};

struct HandshakeMessage {
  std::string ict;
  SessionId session_id;
  Bytes signature;

  /// {"ict", "session_id", "sig"}
  Json to_json() const;
  static HandshakeMessage from_json(const Json& j);
};

/// Bytes covered by a handshake signature: session id, '.', serialized ICT.
std::string handshake_signing_input(const SessionId& session, std::string_view ict);

struct PendingHandshake {
  SessionId session_id;
  std::string peer_id;
  PublicKey own_key;
};

/// Thread-safe table of outstanding initiations, keyed by session id.
class PendingHandshakes {
 public:
  void add(PendingHandshake pending);
  /// Removes and returns the entry, if any.
  std::optional<PendingHandshake> take(const SessionId& session);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, PendingHandshake> pending_;
};

/// Throws Error(key_ict_mismatch) or Error(wrong_context) when the caller's
/// own key and ICT do not fit together.
std::pair<HandshakeMessage, PendingHandshake> vc_initiate(const KeyPairDescriptor& own_key, const std::string& own_ict,
                                                          const std::string& peer_id, const Clock& clock);

struct VcResponse {
  std::optional<HandshakeMessage> reply;  // absent on rejection
  AuthenticationResult result;
};

VcResponse vc_respond(const HandshakeMessage& incoming, const KeyPairDescriptor& own_key, const std::string& own_ict,
                      const TrustPolicy& policy, const KeyLookup& op_keys, const Clock& clock,
                      const VerifyOptions& options = {});

/// Outcome of a completed handshake. On acceptance both confirmed keys are
/// handed to the caller for channel establishment; they stay usable after
/// the ICTs expire.
struct MutualAuthentication {
  AuthenticationResult peer;
  std::optional<PublicKey> own_channel_key;
  std::optional<PublicKey> peer_channel_key;
};

MutualAuthentication vc_complete(const PendingHandshake& pending, const HandshakeMessage& response,
                                 const TrustPolicy& policy, const KeyLookup& op_keys, const Clock& clock,
                                 const VerifyOptions& options = {});

/// Binds an ICT to the key that already authenticates a secure channel.
/// The ICT is evaluated at receipt_time, so verification may happen later.
AuthenticationResult im_bind_channel(const PublicKey& channel_public_key, const std::string& ict,
                                     const TrustPolicy& policy, const KeyLookup& op_keys, UnixTime receipt_time,
                                     const VerifyOptions& options = {});

struct SignedMessage {
  Bytes body;
  std::vector<Bytes> attachments;
  UnixTime sent_at = 0;
  std::string ict;
  Bytes signature;

  /// {"body": b64url, "attachments": [b64url], "sent_at", "ict", "sig": b64url}
  Json to_json() const;
  static SignedMessage from_json(const Json& j);
};

/// Length-prefixed encoding of (body, attachments, sent_at, ict): every
/// field is preceded by its 8-byte big-endian length, attachments by their
/// count.
Bytes signed_message_encoding(const Bytes& body, const std::vector<Bytes>& attachments, UnixTime sent_at,
                              std::string_view ict);

SignedMessage email_sign(Bytes body, std::vector<Bytes> attachments, const KeyPairDescriptor& own_key,
                         const std::string& own_ict, const Clock& clock);

/// Reference time is the inbox timestamp when the recipient trusts its mail
/// server, otherwise clock.now(). Ephemeral-key ICTs must be valid at the
/// reference time. Long-term-key ICTs are evaluated at the signed sent_at
/// (capped at the reference time) and the key must not be revoked.
AuthenticationResult email_verify(const SignedMessage& msg, const TrustPolicy& policy, const KeyLookup& op_keys,
                                  UnixTime inbox_timestamp, bool trust_inbox_time, const Clock& clock,
                                  const VerifyOptions& options = {});

}  // namespace oidc2
