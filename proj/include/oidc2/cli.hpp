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

#include <iosfwd>
#include <string>
#include <vector>

namespace oidc2::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // protocol or verification failure
inline constexpr int kExitUsage = 2;    // bad arguments

enum class OutputFormat { text, json };

/// Settings shared by the subcommands; filled from flags and environment.
struct CliConfig {
  std::string issuer_url;
  std::string op_stub_url;
  std::string policy_path;
  std::string key_path;
  OutputFormat output_format = OutputFormat::text;
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

/// Entry point of the `oidc2` tool. `args` includes the program name.
int run(const std::vector<std::string>& args, Streams io);

}  // namespace oidc2::cli
