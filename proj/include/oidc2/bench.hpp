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
#include <string>
#include <vector>

#include "oidc2/crypto.hpp"
#include "oidc2/op_stub.hpp"

namespace oidc2 {

enum class Experiment {
  token_refresh,  // A: refresh token -> /token
  ict_request,    // B: fresh key pair + PoP + access token -> /ict
};

std::string_view to_string(Experiment e) noexcept;
/// Accepts "a"/"A" and "b"/"B".
Experiment parse_experiment(std::string_view text);

struct BenchTarget {
  std::string op_url;      // base URL of the provider (/token lives here)
  std::string issuer_url;  // base URL of the /ict service (experiment B)
  std::string username;
  std::string password;
  ScopeSet scopes{"openid", "profile", "e2e_auth_email"};
  std::string context = "email";
  SignatureAlgorithm client_algorithm = SignatureAlgorithm::es256;
};

struct BenchReport {
  Experiment experiment = Experiment::token_refresh;
  std::vector<std::int64_t> runs;  // completed requests per run
  double run_duration_seconds = 0;
  int run_count = 0;
  double mean_per_minute = 0;
  double ci95_lo = 0;
  double ci95_hi = 0;
  bool degenerate_interval = false;  // fewer than two runs
  bool client_keygen_included = false;
  std::string client_algorithm;

  Json to_json() const;
};

using BenchProgress = std::function<void(int run_index, std::int64_t count)>;

/// Closed loop: each request is sent only after the previous response
/// arrived. One discarded warm-up request precedes every run. Throws
/// Error(auth_setup_failed) if tokens cannot be obtained and
/// Error(endpoint_unreachable) on transport failure.
BenchReport run_experiment(Experiment kind, const BenchTarget& target, double run_duration_seconds = 60,
                           int run_count = 20, const BenchProgress& progress = {});

/// Turns per-run counts into the report statistics (requests per minute).
BenchReport summarize_runs(Experiment kind, std::vector<std::int64_t> runs, double run_duration_seconds);

}  // namespace oidc2
