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

#include "oidc2/bench.hpp"

#include <chrono>
#include <memory>

#include <httplib.h>

#include "oidc2/error.hpp"
#include "oidc2/http_util.hpp"
#include "oidc2/issuer.hpp"
#include "oidc2/pop.hpp"
#include "oidc2/stats.hpp"

namespace oidc2 {
namespace {

using SteadyClock = std::chrono::steady_clock;

std::unique_ptr<httplib::Client> keep_alive_client(const std::string& base_url) {
  auto client = std::make_unique<httplib::Client>(split_url(base_url).origin);
  client->set_keep_alive(true);
  client->set_connection_timeout(std::chrono::seconds(5));
  client->set_read_timeout(std::chrono::seconds(10));
  return client;
}

std::string path_of(const std::string& base_url, std::string_view endpoint) {
  return split_url(join_url(base_url, endpoint)).path;
}

class TokenSession {
 public:
  explicit TokenSession(const BenchTarget& target)
      : client_(keep_alive_client(target.op_url)), path_(path_of(target.op_url, "/token")) {
    auto res = client_->Post(path_,
                             httplib::Params{{"grant_type", "password"},
                                             {"username", target.username},
                                             {"password", target.password},
                                             {"scope", join_scopes(target.scopes)}});
    if (!res) throw Error(Errc::endpoint_unreachable, "token endpoint unreachable");
    if (res->status != 200) throw Error(Errc::auth_setup_failed, "password grant failed: " + res->body);
    current_ = TokenResponse::from_json(Json::parse(res->body));
  }

  /// One refresh round trip; rotates the stored refresh token.
  void refresh() {
    auto res = client_->Post(path_, httplib::Params{{"grant_type", "refresh_token"},
                                                    {"refresh_token", current_.refresh_token}});
    if (!res) throw Error(Errc::endpoint_unreachable, "token endpoint unreachable");
    if (res->status != 200) throw Error(Errc::auth_setup_failed, "refresh failed: " + res->body);
    current_ = TokenResponse::from_json(Json::parse(res->body));
  }

  const TokenResponse& tokens() const { return current_; }

 private:
  std::unique_ptr<httplib::Client> client_;
  std::string path_;
  TokenResponse current_;
};

class IctSession {
 public:
  IctSession(const BenchTarget& target, TokenSession& tokens)
      : target_(target), tokens_(tokens), client_(keep_alive_client(target.issuer_url)),
        path_(path_of(target.issuer_url, "/ict")) {}

  /// Key generation, PoP, and the /ict round trip. Returns false when the
  /// access token had expired (the caller refreshes and retries).
  bool request() {
    const auto key = generate_signing_keypair(target_.client_algorithm, KeyKind::ephemeral);
    IctRequest req;
    req.public_key = key.public_part.jwk();
    req.pop = create_pop(key, clock_);
    req.contexts = {target_.context};
    const httplib::Headers headers{{"Authorization", "Bearer " + tokens_.tokens().access_token}};
    auto res = client_->Post(path_, headers, req.body_json().dump(), "application/json");
    if (!res) throw Error(Errc::endpoint_unreachable, "ict endpoint unreachable");
    if (res->status == 401) return false;
    if (res->status != 200) throw Error(Errc::auth_setup_failed, "ICT request failed: " + res->body);
    return true;
  }

 private:
  const BenchTarget& target_;
  TokenSession& tokens_;
  std::unique_ptr<httplib::Client> client_;
  std::string path_;
  SystemClock clock_;
};

}  // namespace

std::string_view to_string(Experiment e) noexcept { return e == Experiment::token_refresh ? "A" : "B"; }

Experiment parse_experiment(std::string_view text) {
  if (text == "a" || text == "A") return Experiment::token_refresh;
  if (text == "b" || text == "B") return Experiment::ict_request;
  throw std::invalid_argument("experiment must be a or b");
}

Json BenchReport::to_json() const {
  Json j{{"experiment", to_string(experiment)},
         {"endpoint", experiment == Experiment::token_refresh ? "/token" : "/ict"},
         {"runs", runs},
         {"run_count", run_count},
         {"run_duration_seconds", run_duration_seconds},
         {"mean_per_minute", mean_per_minute},
         {"ci95", {ci95_lo, ci95_hi}},
         {"degenerate_interval", degenerate_interval}};
  if (experiment == Experiment::ict_request) {
    j["client_keygen_included"] = client_keygen_included;
    j["client_algorithm"] = client_algorithm;
  }
  return j;
}

BenchReport summarize_runs(Experiment kind, std::vector<std::int64_t> runs, double run_duration_seconds) {
  BenchReport r;
  r.experiment = kind;
  r.run_duration_seconds = run_duration_seconds;
  r.run_count = static_cast<int>(runs.size());
  std::vector<double> rates;
  for (auto c : runs) rates.push_back(static_cast<double>(c) * 60.0 / run_duration_seconds);
  r.runs = std::move(runs);
  if (rates.size() >= 2) {
    const auto ci = mean_ci95(rates);
    r.mean_per_minute = ci.mean;
    r.ci95_lo = ci.lo;
    r.ci95_hi = ci.hi;
  } else {
    r.degenerate_interval = true;
    r.mean_per_minute = rates.empty() ? 0.0 : rates.front();
    r.ci95_lo = r.ci95_hi = r.mean_per_minute;
  }
  return r;
}

BenchReport run_experiment(Experiment kind, const BenchTarget& target, double run_duration_seconds, int run_count,
                           const BenchProgress& progress) {
  if (run_duration_seconds <= 0 || run_count <= 0) throw std::invalid_argument("duration and runs must be positive");
  TokenSession tokens(target);
  std::optional<IctSession> icts;
  if (kind == Experiment::ict_request) icts.emplace(target, tokens);

  const auto duration = std::chrono::duration_cast<SteadyClock::duration>(
      std::chrono::duration<double>(run_duration_seconds));
  std::vector<std::int64_t> counts;
  for (int run = 0; run < run_count; ++run) {
    std::int64_t count = 0;
    if (kind == Experiment::token_refresh) {
      tokens.refresh();  // warm-up
      const auto deadline = SteadyClock::now() + duration;
      while (SteadyClock::now() < deadline) {
        tokens.refresh();
        ++count;
      }
    } else {
      tokens.refresh();  // fresh access token for this run, untimed
      if (!icts->request()) throw Error(Errc::auth_setup_failed, "fresh access token rejected");  // warm-up
      const auto deadline = SteadyClock::now() + duration;
      while (SteadyClock::now() < deadline) {
        if (icts->request()) {
          ++count;
        } else {
          tokens.refresh();
        }
      }
    }
    counts.push_back(count);
    if (progress) progress(run, count);
  }
  auto report = summarize_runs(kind, std::move(counts), run_duration_seconds);
  report.client_keygen_included = kind == Experiment::ict_request;
  report.client_algorithm = kind == Experiment::ict_request ? std::string(to_string(target.client_algorithm)) : "";
  return report;
}

}  // namespace oidc2
