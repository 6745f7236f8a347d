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

#include "oidc2/error.hpp"

#include <array>
#include <utility>

namespace oidc2 {
namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 40> kNames{{
    {Errc::unsupported_algorithm, "unsupported-algorithm"},
    {Errc::validity_too_long, "validity-too-long"},
    {Errc::empty_contexts, "empty-contexts"},
    {Errc::private_material_in_key, "private-material-in-key"},
    {Errc::missing_private_key, "missing-private-key"},
    {Errc::signature_invalid, "signature-invalid"},
    {Errc::token_expired, "token-expired"},
    {Errc::token_not_yet_valid, "token-not-yet-valid"},
    {Errc::wrong_token_type, "wrong-token-type"},
    {Errc::malformed_token, "malformed-token"},
    {Errc::invalid_key, "invalid-key"},
    {Errc::stale_timestamp, "stale-timestamp"},
    {Errc::replayed_nonce, "replayed-nonce"},
    {Errc::bad_signature, "bad-signature"},
    {Errc::malformed_pop, "malformed-pop"},
    {Errc::invalid_request, "invalid-request"},
    {Errc::invalid_token, "invalid-token"},
    {Errc::insufficient_scope, "insufficient-scope"},
    {Errc::unknown_context, "unknown-context"},
    {Errc::upstream_unavailable, "upstream-unavailable"},
    {Errc::malformed_upstream_response, "malformed-upstream-response"},
    {Errc::bad_credentials, "bad-credentials"},
    {Errc::scope_not_granted, "scope-not-granted"},
    {Errc::invalid_refresh_token, "invalid-refresh-token"},
    {Errc::untrusted_issuer, "untrusted-issuer"},
    {Errc::context_mismatch, "context-mismatch"},
    {Errc::key_revoked, "key-revoked"},
    {Errc::revocation_unreachable, "revocation-unreachable"},
    {Errc::unknown_key_id, "unknown-key-id"},
    {Errc::key_mismatch, "key-mismatch"},
    {Errc::all_rejected, "all-rejected"},
    {Errc::key_ict_mismatch, "key-ict-mismatch"},
    {Errc::wrong_context, "wrong-context"},
    {Errc::bad_handshake_signature, "bad-handshake-signature"},
    {Errc::session_mismatch, "session-mismatch"},
    {Errc::receipt_after_expiry, "receipt-after-expiry"},
    {Errc::ict_expired, "ict-expired"},
    {Errc::insufficient_samples, "insufficient-samples"},
    {Errc::endpoint_unreachable, "endpoint-unreachable"},
    {Errc::auth_setup_failed, "auth-setup-failed"},
}};

}  // namespace

std::string_view to_string(Errc code) noexcept {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown-error";
}

Errc errc_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  throw std::invalid_argument("unknown error code: " + std::string(name));
}

}  // namespace oidc2
