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

#include "oidc2/flows.hpp"

#include <algorithm>
#include <cstdio>

#include "oidc2/error.hpp"

namespace oidc2 {
namespace {

std::string escape_id(std::string_view id) {
  std::string out;
  for (char c : id) {
    if (c == '%') {
      out += "%25";
    } else if (c == '|') {
      out += "%7C";
    } else {
      out += c;
    }
  }
  return out;
}

// Own key and own ICT must belong together and carry the flow's context.
IctClaims check_own_credentials(const KeyPairDescriptor& own_key, const std::string& own_ict,
                                std::string_view context) {
  if (!own_key.private_part) throw Error(Errc::missing_private_key, "own key has no private part");
  auto claims = decode_unverified(own_ict).second;
  if (jwk_thumbprint(claims.confirmation_key) != own_key.public_part.thumbprint()) {
    throw Error(Errc::key_ict_mismatch, "ICT certifies a different key");
  }
  if (!claims.contexts.count(std::string(context))) {
    throw Error(Errc::wrong_context, "ICT is not valid for context " + std::string(context));
  }
  return claims;
}

std::optional<PublicKey> confirmation_key_of(const std::string& ict) {
  try {
    return PublicKey::from_jwk(decode_unverified(ict).second.confirmation_key);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void put_length(Bytes& out, std::uint64_t n) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
}

void put_field(Bytes& out, std::span<const std::uint8_t> field) {
  put_length(out, field.size());
  out.insert(out.end(), field.begin(), field.end());
}

std::vector<Bytes> decode_b64_list(const Json& arr) {
  std::vector<Bytes> out;
  for (const auto& a : arr) {
    auto b = base64url_decode(a.get<std::string>());
    if (!b) throw Error(Errc::invalid_request, "attachment is not base64url");
    out.push_back(std::move(*b));
  }
  return out;
}

Bytes decode_b64_field(const Json& j, const char* name) {
  auto b = base64url_decode(j.at(name).get<std::string>());
  if (!b) throw Error(Errc::invalid_request, std::string(name) + " is not base64url");
  return *b;
}

}  // namespace

std::int64_t recommended_validity(std::string_view context) {
  if (context == kEmailContext) return kEmailValiditySeconds;
  if (context == kImContext) return kImValiditySeconds;
  return kVcValiditySeconds;
}

SessionId SessionId::generate(std::string_view initiator_id, std::string_view responder_id, const Clock& clock) {
  const auto rnd = random_bytes(8);
  char hex[17] = {};
  for (std::size_t i = 0; i < rnd.size(); ++i) std::snprintf(hex + 2 * i, 3, "%02x", rnd[i]);
  return SessionId{escape_id(initiator_id) + "|" + escape_id(responder_id) + "|" +
                   std::to_string(clock.now() * 1000) + "|" + hex};
}

Json HandshakeMessage::to_json() const {
  return Json{{"ict", ict}, {"session_id", session_id.value}, {"sig", base64url_encode(signature)}};
}

HandshakeMessage HandshakeMessage::from_json(const Json& j) {
  try {
    return HandshakeMessage{j.at("ict").get<std::string>(), SessionId{j.at("session_id").get<std::string>()},
                            decode_b64_field(j, "sig")};
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_request, e.what());
  }
}

std::string handshake_signing_input(const SessionId& session, std::string_view ict) {
  std::string out = session.value;
  out += '.';
  out += ict;
  return out;
}

void PendingHandshakes::add(PendingHandshake pending) {
  std::lock_guard lock(mu_);
  const auto key = pending.session_id.value;
  pending_.insert_or_assign(key, std::move(pending));
}

std::optional<PendingHandshake> PendingHandshakes::take(const SessionId& session) {
  std::lock_guard lock(mu_);
  auto it = pending_.find(session.value);
  if (it == pending_.end()) return std::nullopt;
  auto out = std::move(it->second);
  pending_.erase(it);
  return out;
}

std::size_t PendingHandshakes::size() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

std::pair<HandshakeMessage, PendingHandshake> vc_initiate(const KeyPairDescriptor& own_key, const std::string& own_ict,
                                                          const std::string& peer_id, const Clock& clock) {
  const auto claims = check_own_credentials(own_key, own_ict, kVcContext);
  auto session = SessionId::generate(claims.subject, peer_id, clock);
  HandshakeMessage msg{own_ict, session, own_key.private_part->sign(handshake_signing_input(session, own_ict))};
  return {std::move(msg), PendingHandshake{std::move(session), peer_id, own_key.public_part}};
}

VcResponse vc_respond(const HandshakeMessage& incoming, const KeyPairDescriptor& own_key, const std::string& own_ict,
                      const TrustPolicy& policy, const KeyLookup& op_keys, const Clock& clock,
                      const VerifyOptions& options) {
  const auto peer_key = confirmation_key_of(incoming.ict);
  if (!peer_key || !peer_key->verify(handshake_signing_input(incoming.session_id, incoming.ict), incoming.signature)) {
    return VcResponse{std::nullopt, AuthenticationResult::rejected(Errc::bad_handshake_signature,
                                                                   "signature over session id and ICT does not verify")};
  }
  auto result = verify_ict(incoming.ict, op_keys, policy, kVcContext, clock, options);
  if (!result.accepted) return VcResponse{std::nullopt, std::move(result)};

  check_own_credentials(own_key, own_ict, kVcContext);
  HandshakeMessage reply{own_ict, incoming.session_id,
                         own_key.private_part->sign(handshake_signing_input(incoming.session_id, own_ict))};
  return VcResponse{std::move(reply), std::move(result)};
}

MutualAuthentication vc_complete(const PendingHandshake& pending, const HandshakeMessage& response,
                                 const TrustPolicy& policy, const KeyLookup& op_keys, const Clock& clock,
                                 const VerifyOptions& options) {
  if (!(response.session_id == pending.session_id)) {
    return {AuthenticationResult::rejected(Errc::session_mismatch, "response belongs to another session"), {}, {}};
  }
  const auto peer_key = confirmation_key_of(response.ict);
  if (!peer_key || !peer_key->verify(handshake_signing_input(response.session_id, response.ict), response.signature)) {
    return {AuthenticationResult::rejected(Errc::bad_handshake_signature, "response signature does not verify"), {}, {}};
  }
  auto result = verify_ict(response.ict, op_keys, policy, kVcContext, clock, options);
  if (!result.accepted) return {std::move(result), {}, {}};
  return {std::move(result), pending.own_key, *peer_key};
}

AuthenticationResult im_bind_channel(const PublicKey& channel_public_key, const std::string& ict,
                                     const TrustPolicy& policy, const KeyLookup& op_keys, UnixTime receipt_time,
                                     const VerifyOptions& options) {
  const FixedClock at_receipt(receipt_time);
  auto result = verify_ict(ict, op_keys, policy, kImContext, at_receipt, options);
  if (!result.accepted) {
    if (result.rejection_reason == Errc::token_expired) {
      result.rejection_reason = Errc::receipt_after_expiry;
      result.detail = "ICT had expired when it was received; repeat the verification";
    }
    return result;
  }
  if (jwk_thumbprint(result.confirmation_key) != channel_public_key.thumbprint()) {
    auto rejected = AuthenticationResult::rejected(Errc::key_mismatch, "ICT key differs from the channel key");
    rejected.issuer = result.issuer;
    rejected.subject = result.subject;
    return rejected;
  }
  return result;
}

Json SignedMessage::to_json() const {
  Json atts = Json::array();
  for (const auto& a : attachments) atts.push_back(base64url_encode(a));
  return Json{{"body", base64url_encode(body)},
              {"attachments", atts},
              {"sent_at", sent_at},
              {"ict", ict},
              {"sig", base64url_encode(signature)}};
}

SignedMessage SignedMessage::from_json(const Json& j) {
  try {
    return SignedMessage{decode_b64_field(j, "body"), decode_b64_list(j.at("attachments")),
                         j.at("sent_at").get<UnixTime>(), j.at("ict").get<std::string>(), decode_b64_field(j, "sig")};
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_request, e.what());
  }
}

Bytes signed_message_encoding(const Bytes& body, const std::vector<Bytes>& attachments, UnixTime sent_at,
                              std::string_view ict) {
  Bytes out;
  put_field(out, body);
  put_length(out, attachments.size());
  for (const auto& a : attachments) put_field(out, a);
  const auto ts = std::to_string(sent_at);
  put_field(out, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(ts.data()), ts.size()));
  put_field(out, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(ict.data()), ict.size()));
  return out;
}

SignedMessage email_sign(Bytes body, std::vector<Bytes> attachments, const KeyPairDescriptor& own_key,
                         const std::string& own_ict, const Clock& clock) {
  check_own_credentials(own_key, own_ict, kEmailContext);
  SignedMessage msg{std::move(body), std::move(attachments), clock.now(), own_ict, {}};
  msg.signature = own_key.private_part->sign(signed_message_encoding(msg.body, msg.attachments, msg.sent_at, msg.ict));
  return msg;
}

AuthenticationResult email_verify(const SignedMessage& msg, const TrustPolicy& policy, const KeyLookup& op_keys,
                                  UnixTime inbox_timestamp, bool trust_inbox_time, const Clock& clock,
                                  const VerifyOptions& options) {
  const auto signer = confirmation_key_of(msg.ict);
  if (!signer || !signer->verify(signed_message_encoding(msg.body, msg.attachments, msg.sent_at, msg.ict),
                                 msg.signature)) {
    return AuthenticationResult::rejected(Errc::bad_signature, "message signature does not verify under the ICT key");
  }
  UnixTime reference = trust_inbox_time ? inbox_timestamp : clock.now();
  const auto kind = decode_unverified(msg.ict).second.key_kind;
  if (kind == KeyKind::long_term) reference = std::min(reference, msg.sent_at);

  const FixedClock at_reference(reference);
  auto result = verify_ict(msg.ict, op_keys, policy, kEmailContext, at_reference, options);
  if (!result.accepted && result.rejection_reason == Errc::token_expired) {
    result.rejection_reason = Errc::ict_expired;
    result.detail = "ICT expired before the reference time " + std::to_string(reference);
  }
  return result;
}

}  // namespace oidc2
