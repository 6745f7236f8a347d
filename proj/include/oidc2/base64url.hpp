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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oidc2 {

using Bytes = std::vector<std::uint8_t>;

/// Unpadded base64url (RFC 4648 section 5).
std::string base64url_encode(std::span<const std::uint8_t> data);
std::string base64url_encode(std::string_view data);

/// Strict decoder: rejects padding, characters outside the url-safe alphabet,
/// impossible lengths, and non-zero trailing bits, so every byte string has
/// exactly one accepted encoding.
std::optional<Bytes> base64url_decode(std::string_view text);

inline std::string to_string(const Bytes& b) { return {b.begin(), b.end()}; }
inline Bytes to_bytes(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace oidc2
