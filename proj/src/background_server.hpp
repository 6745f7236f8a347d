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

#include <atomic>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

#include <json.hpp>

namespace oidc2::internal {

/// Tracks concurrently running handlers and the high-water mark.
class InflightGauge {
 public:
  class Guard {
   public:
    explicit Guard(InflightGauge& g) : g_(g) {
      const int now = ++g_.current_;
      int seen = g_.peak_.load();
      while (now > seen && !g_.peak_.compare_exchange_weak(seen, now)) {
      }
    }
    ~Guard() { --g_.current_; }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    InflightGauge& g_;
  };

  int peak() const noexcept { return peak_.load(); }
  void reset_peak() noexcept { peak_.store(current_.load()); }

 private:
  std::atomic<int> current_{0};
  std::atomic<int> peak_{0};
};

/// httplib::Server on a background thread. Port 0 binds an ephemeral port.
class BackgroundServer {
 public:
  BackgroundServer() = default;
  ~BackgroundServer() { stop(); }
  BackgroundServer(const BackgroundServer&) = delete;
  BackgroundServer& operator=(const BackgroundServer&) = delete;

  httplib::Server& server() { return server_; }

  int bind(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      port_ = server_.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return port_;
  }

  void listen_in_background() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  int start(const std::string& host, int port) {
    bind(host, port);
    listen_in_background();
    return port_;
  }

  /// Blocks the calling thread; used by the CLI's foreground services.
  void run(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const noexcept { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

inline void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline std::optional<std::string> bearer_token(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (auth.size() <= prefix.size() || auth.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  return auth.substr(prefix.size());
}

}  // namespace oidc2::internal
