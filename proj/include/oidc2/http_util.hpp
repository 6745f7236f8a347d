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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace oidc2 {

/// "scheme://host[:port]" plus the path (always starting with '/').
struct Url {
  std::string origin;
  std::string path;
};

/// Throws Error(invalid_request) unless the URL is http:// or https://.
Url split_url(std::string_view url);

/// Appends `path` to `base`, collapsing a doubled slash.
std::string join_url(std::string_view base, std::string_view path);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One-shot GET. Returns nullopt when the server cannot be reached.
std::optional<HttpResponse> http_get(std::string_view url, std::optional<std::string> bearer = std::nullopt,
                                     std::chrono::milliseconds timeout = std::chrono::seconds(5));

/// One-shot POST with an explicit content type.
std::optional<HttpResponse> http_post(std::string_view url, std::string body, std::string_view content_type,
                                      std::optional<std::string> bearer = std::nullopt,
                                      std::chrono::milliseconds timeout = std::chrono::seconds(5));

}  // namespace oidc2
