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

#include <stdexcept>
#include <string>
#include <string_view>

namespace oidc2 {

/// Protocol and verification error codes. Every code has a stable kebab-case
/// name (see to_string) that appears on the wire and in CLI output.
enum class Errc {
  // token-core
  unsupported_algorithm,
  validity_too_long,
  empty_contexts,
  private_material_in_key,
  missing_private_key,
  signature_invalid,
  token_expired,
  token_not_yet_valid,
  wrong_token_type,
  malformed_token,
  invalid_key,
  // pop
  stale_timestamp,
  replayed_nonce,
  bad_signature,
  malformed_pop,
  // issuer-service
  invalid_request,
  invalid_token,
  insufficient_scope,
  unknown_context,
  upstream_unavailable,
  malformed_upstream_response,
  // op-stub
  bad_credentials,
  scope_not_granted,
  invalid_refresh_token,
  // verifier
  untrusted_issuer,
  context_mismatch,
  key_revoked,
  revocation_unreachable,
  unknown_key_id,
  key_mismatch,
  all_rejected,
  // e2e flows
  key_ict_mismatch,
  wrong_context,
  bad_handshake_signature,
  session_mismatch,
  receipt_after_expiry,
  ict_expired,
  // bench
  insufficient_samples,
  endpoint_unreachable,
  auth_setup_failed,
};

std::string_view to_string(Errc code) noexcept;

/// Parses a kebab-case code name; throws std::invalid_argument when unknown.
Errc errc_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}
  explicit Error(Errc code) : Error(code, std::string(to_string(code))) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace oidc2
