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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oidc2/clock.hpp"
#include "oidc2/issuer.hpp"
#include "oidc2/op_stub.hpp"
#include "oidc2/verifier.hpp"

namespace oidc2 {

/// The bundled seed users (alice, bob, carol).
std::vector<StubUser> default_stub_users();

/// An OP stub and an /ict service running in-process on ephemeral loopback
/// ports, sharing the stub's signing key. Used by the CLI demos, the local
/// benchmark and the integration tests.
class LocalStack {
 public:
  struct Options {
    std::vector<StubUser> users = default_stub_users();
    SignatureAlgorithm op_algorithm = SignatureAlgorithm::rs256;
    std::optional<PrivateKey> op_key;
    std::map<std::string, std::int64_t> allowed_contexts{{"vc", 300}, {"im", 300}, {"email", 3600}};
    std::int64_t default_validity_seconds = 300;
  };

  explicit LocalStack(const Clock& clock);
  LocalStack(const Clock& clock, Options options);
  ~LocalStack();
  LocalStack(const LocalStack&) = delete;
  LocalStack& operator=(const LocalStack&) = delete;

  const std::string& op_url() const noexcept { return op_url_; }
  const std::string& issuer_url() const noexcept { return issuer_url_; }

  OpStub& stub() noexcept { return *stub_; }
  OpStubServer& stub_server() noexcept { return *stub_server_; }
  IssuerServer& issuer_server() noexcept { return *issuer_server_; }

  /// Trust policy classifying this OP as authoritative for email.
  TrustPolicy default_policy(int rank = 1) const;

  /// Key lookup answering for this OP's signing key.
  KeyLookup key_lookup() const;

 private:
  std::unique_ptr<OpStub> stub_;
  std::unique_ptr<OpStubServer> stub_server_;
  std::unique_ptr<IssuerServer> issuer_server_;
  std::string op_url_;
  std::string issuer_url_;
};

}  // namespace oidc2
