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

#include "oidc2/local_stack.hpp"

#include "oidc2_fixtures.hpp"

namespace oidc2 {

std::vector<StubUser> default_stub_users() { return load_stub_users(Json::parse(fixtures::kDefaultUsersJson)); }

LocalStack::LocalStack(const Clock& clock) : LocalStack(clock, Options{}) {}

LocalStack::LocalStack(const Clock& clock, Options options) {
  auto key = options.op_key ? *options.op_key : PrivateKey::generate(options.op_algorithm);
  stub_ = std::make_unique<OpStub>("", std::move(options.users), KeyPairDescriptor::from_private(std::move(key)), clock);
  stub_server_ = std::make_unique<OpStubServer>(*stub_);
  const int stub_port = stub_server_->bind("127.0.0.1", 0);
  op_url_ = "http://127.0.0.1:" + std::to_string(stub_port);
  stub_->set_issuer(op_url_);
  stub_server_->listen_in_background();

  IssuerConfig config{.issuer_url = op_url_,
                      .op_signing_key = stub_->signing_key(),
                      .key_id = stub_->key_id(),
                      .userinfo_url = op_url_ + "/userinfo",
                      .allowed_contexts = std::move(options.allowed_contexts),
                      .default_validity_seconds = options.default_validity_seconds};
  issuer_server_ = std::make_unique<IssuerServer>(std::move(config), clock);
  issuer_url_ = "http://127.0.0.1:" + std::to_string(issuer_server_->start("127.0.0.1", 0));
}

LocalStack::~LocalStack() {
  if (issuer_server_) issuer_server_->stop();
  if (stub_server_) stub_server_->stop();
}

TrustPolicy LocalStack::default_policy(int rank) const {
  TrustPolicy policy;
  policy.set(op_url_, TrustEntry{OpClass::authoritative, {"email"}, {}, rank});
  return policy;
}

KeyLookup LocalStack::key_lookup() const {
  return static_key_lookup({{{op_url_, stub_->key_id()}, stub_->signing_key().public_part}});
}

}  // namespace oidc2
