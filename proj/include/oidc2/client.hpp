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

#include <optional>
#include <string>

#include "oidc2/clock.hpp"
#include "oidc2/issuer.hpp"
#include "oidc2/op_stub.hpp"
#include "oidc2/token.hpp"

namespace oidc2 {

/// Resource-owner password grant against <op_url>/token. Errors reported by
/// the provider are rethrown with their code; transport failures become
/// Error(endpoint_unreachable).
TokenResponse password_grant(const std::string& op_url, const std::string& username, const std::string& password,
                             const ScopeSet& scopes);

TokenResponse refresh_grant(const std::string& op_url, const std::string& refresh_token);

/// Builds an ICT Request body for `client_key` with a fresh PoP.
IctRequest make_ict_request(const KeyPairDescriptor& client_key, ContextSet contexts, const Clock& clock,
                            std::optional<std::int64_t> validity = std::nullopt);

/// POST <issuer_url>/ict. Returns the serialized ICT; an error answer is
/// rethrown as Error with the code from the response body.
std::string request_ict(const std::string& issuer_url, const std::string& access_token, const IctRequest& request);

/// Convenience for demos and tests: password grant for the user with the
/// e2e scopes of `contexts`, then an ICT Request with a fresh PoP.
std::string obtain_ict(const std::string& op_url, const std::string& issuer_url, const std::string& username,
                       const std::string& password, const KeyPairDescriptor& client_key, ContextSet contexts,
                       const Clock& clock, std::optional<std::int64_t> validity = std::nullopt);

}  // namespace oidc2
