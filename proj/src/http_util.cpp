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

#include "oidc2/http_util.hpp"

#include <httplib.h>

#include "oidc2/error.hpp"

namespace oidc2 {
namespace {

httplib::Client make_client(const Url& url, std::chrono::milliseconds timeout) {
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client;
}

httplib::Headers auth_headers(const std::optional<std::string>& bearer) {
  httplib::Headers headers;
  if (bearer) headers.emplace("Authorization", "Bearer " + *bearer);
  return headers;
}

}  // namespace

Url split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error(Errc::invalid_request, "not an absolute URL: " + std::string(url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(Errc::invalid_request, "unsupported scheme in " + std::string(url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return Url{std::string(url), "/"};
  return Url{std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string join_url(std::string_view base, std::string_view path) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (path.empty() || path.front() != '/') out += '/';
  out += path;
  return out;
}

std::optional<HttpResponse> http_get(std::string_view url, std::optional<std::string> bearer,
                                     std::chrono::milliseconds timeout) {
  const auto parts = split_url(url);
  auto client = make_client(parts, timeout);
  auto res = client.Get(parts.path, auth_headers(bearer));
  if (!res) return std::nullopt;
  return HttpResponse{res->status, res->body};
}

std::optional<HttpResponse> http_post(std::string_view url, std::string body, std::string_view content_type,
                                      std::optional<std::string> bearer, std::chrono::milliseconds timeout) {
  const auto parts = split_url(url);
  auto client = make_client(parts, timeout);
  auto res = client.Post(parts.path, auth_headers(bearer), body, std::string(content_type));
  if (!res) return std::nullopt;
  return HttpResponse{res->status, res->body};
}

}  // namespace oidc2
