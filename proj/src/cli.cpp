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

#include "oidc2/cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oidc2/bench.hpp"
#include "oidc2/client.hpp"
#include "oidc2/error.hpp"
#include "oidc2/flows.hpp"
#include "oidc2/http_util.hpp"
#include "oidc2/issuer.hpp"
#include "oidc2/local_stack.hpp"
#include "oidc2/op_stub.hpp"
#include "oidc2/pop.hpp"
#include "oidc2/verifier.hpp"

namespace oidc2::cli {
namespace {

namespace fs = std::filesystem;

struct Session {
  Streams io;
  CliConfig config;
};

int report_error(const Session& s, std::string_view code, const std::string& detail, int exit_code) {
  if (s.config.output_format == OutputFormat::json) {
    s.io.err << Json{{"error", code}, {"detail", detail}, {"exit_code", exit_code}}.dump() << '\n';
  } else {
    s.io.err << "error: " << code << ": " << detail << '\n';
  }
  return exit_code;
}

int usage_error(const Session& s, const std::string& detail) { return report_error(s, "usage", detail, kExitUsage); }

int protocol_error(const Session& s, const Error& e) {
  return report_error(s, to_string(e.code()), e.detail(), kExitFailure);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& content,
                fs::perms perms = fs::perms::owner_read | fs::perms::owner_write | fs::perms::group_read |
                                  fs::perms::others_read) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  out.close();
  std::error_code ec;
  fs::permissions(path, perms, ec);
  return static_cast<bool>(out);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Foreground services stop on SIGINT/SIGTERM.
std::function<void()> g_stop_foreground;

extern "C" void on_stop_signal(int) {
  if (g_stop_foreground) g_stop_foreground();
}

void install_stop_handler(std::function<void()> stop) {
  g_stop_foreground = std::move(stop);
  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGTERM, on_stop_signal);
}

// keygen ---------------------------------------------------------------------

struct KeygenOptions {
  std::string alg = "rs256";
  std::string kind = "ephemeral";
  std::string rev_srv;
  std::string out = "client-key";
};

int cmd_keygen(const Session& s, const KeygenOptions& o) {
  SignatureAlgorithm alg{};
  KeyKind kind{};
  try {
    alg = parse_algorithm(o.alg);
  } catch (const Error&) {
    return usage_error(s, "unsupported algorithm " + o.alg + " (use rs256 or es256)");
  }
  try {
    kind = parse_key_kind(o.kind);
  } catch (const Error&) {
    return usage_error(s, "unknown key kind " + o.kind + " (use ephemeral or long-term)");
  }
  if ((kind == KeyKind::long_term) != !o.rev_srv.empty()) {
    return usage_error(s, "--kind long-term requires --rev-srv, and --rev-srv requires --kind long-term");
  }
  const auto key = generate_signing_keypair(
      alg, kind, o.rev_srv.empty() ? std::nullopt : std::optional<std::string>(o.rev_srv));

  Json pub = key.public_part.jwk();
  pub["kid"] = key.public_part.thumbprint();
  pub["alg"] = to_string(alg);
  Json meta{{"jwk", pub}, {"key_kind", to_string(kind)}};
  if (key.revocation_server) meta["rev_srv"] = *key.revocation_server;

  const auto pem_path = o.out + ".pem";
  const auto jwk_path = o.out + ".jwk.json";
  if (!write_file(pem_path, key.private_part->to_pem(), fs::perms::owner_read | fs::perms::owner_write) ||
      !write_file(jwk_path, meta.dump(2) + "\n")) {
    return report_error(s, "io", "cannot write " + pem_path + " / " + jwk_path, kExitFailure);
  }
  if (s.config.output_format == OutputFormat::json) {
    s.io.out << Json{{"private_key", pem_path}, {"public_jwk", jwk_path}, {"kid", pub["kid"]}}.dump() << '\n';
  } else {
    s.io.out << "private key: " << pem_path << "\npublic JWK:  " << jwk_path << "\nthumbprint:  " << pub["kid"].get<std::string>()
             << '\n';
  }
  return kExitOk;
}

// request-ict ----------------------------------------------------------------

struct RequestOptions {
  std::string token;
  std::string user;
  std::string password;
  std::vector<std::string> scopes;
  std::vector<std::string> contexts;
  std::int64_t validity = 0;
  std::string kind = "ephemeral";
  std::string rev_srv;
  std::string reuse_pop;
  std::string out;
};

int cmd_request_ict(const Session& s, const RequestOptions& o) {
  if (s.config.issuer_url.empty()) return usage_error(s, "--issuer (or OIDC2_ISSUER_URL) is required");
  if (s.config.key_path.empty()) return usage_error(s, "--key is required");
  if (o.token.empty() && (s.config.op_stub_url.empty() || o.user.empty())) {
    return usage_error(s, "pass --token, or --op with --user and --password");
  }
  const auto pem = read_file(s.config.key_path);
  if (!pem) return report_error(s, "io", "cannot read " + s.config.key_path, kExitFailure);

  SystemClock clock;
  try {
    std::optional<std::string> rev;
    if (!o.rev_srv.empty()) rev = o.rev_srv;
    KeyKind kind{};
    try {
      kind = parse_key_kind(o.kind);
    } catch (const Error&) {
      return usage_error(s, "unknown key kind " + o.kind);
    }
    if ((kind == KeyKind::long_term) != rev.has_value()) return usage_error(s, "--kind long-term requires --rev-srv");
    const auto key = KeyPairDescriptor::from_private(PrivateKey::from_pem(*pem), kind, rev);

    ContextSet contexts(o.contexts.begin(), o.contexts.end());
    std::string access_token = o.token;
    if (access_token.empty()) {
      ScopeSet scopes(o.scopes.begin(), o.scopes.end());
      if (scopes.empty()) {
        scopes = {"openid", "profile"};
        for (const auto& c : contexts) scopes.insert(std::string(kE2eScopePrefix) + c);
      }
      access_token = password_grant(s.config.op_stub_url, o.user, o.password, scopes).access_token;
    }

    auto request = make_ict_request(key, contexts, clock, o.validity > 0 ? std::optional(o.validity) : std::nullopt);
    if (!o.reuse_pop.empty()) {
      if (const auto saved = read_file(o.reuse_pop)) {
        request.pop = ProofOfPossession::from_json(Json::parse(*saved));
      } else if (!write_file(o.reuse_pop, request.pop.to_json().dump() + "\n")) {
        return report_error(s, "io", "cannot write " + o.reuse_pop, kExitFailure);
      }
    }

    const auto ict = request_ict(s.config.issuer_url, access_token, request);
    if (!o.out.empty() && !write_file(o.out, ict + "\n")) {
      return report_error(s, "io", "cannot write " + o.out, kExitFailure);
    }
    if (s.config.output_format == OutputFormat::json) {
      s.io.out << Json{{"ict", ict}}.dump() << '\n';
    } else {
      s.io.out << ict << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    return protocol_error(s, e);
  }
}

// verify -----------------------------------------------------------------------

struct VerifyCliOptions {
  std::string ict_path;
  std::string context;
  bool interactive = false;
  bool save = false;
};

void print_result(const Session& s, const AuthenticationResult& r) {
  if (s.config.output_format == OutputFormat::json) {
    s.io.out << r.to_json().dump(2) << '\n';
    return;
  }
  s.io.out << "verdict: " << (r.accepted ? "accepted" : "rejected") << '\n';
  if (!r.issuer.empty()) s.io.out << "issuer:  " << r.issuer << '\n';
  if (!r.subject.empty()) s.io.out << "subject: " << r.subject << '\n';
  if (!r.accepted) {
    s.io.out << "reason:  " << (r.rejection_reason ? to_string(*r.rejection_reason) : "rejected") << '\n';
    return;
  }
  s.io.out << "key:     " << jwk_thumbprint(r.confirmation_key) << " (" << to_string(r.key_kind) << ")\n";
  s.io.out << "expires: " << r.expires_at << "\n\n";
  s.io.out << std::left << std::setw(20) << "CLAIM" << std::setw(16) << "PROVENANCE" << "VALUE" << '\n';
  for (const auto& [name, claim] : r.claims) {
    s.io.out << std::left << std::setw(20) << name << std::setw(16) << to_string(claim.provenance)
             << claim.value.dump() << '\n';
  }
}

int cmd_verify(const Session& s, const VerifyCliOptions& o) {
  if (o.save && s.config.policy_path.empty()) return usage_error(s, "--save needs --policy");
  std::optional<std::string> raw;
  if (o.ict_path == "-") {
    std::stringstream ss;
    ss << s.io.in.rdbuf();
    raw = ss.str();
  } else {
    raw = read_file(o.ict_path);
  }
  if (!raw) return report_error(s, "io", "cannot read " + o.ict_path, kExitFailure);

  TrustPolicy policy;
  if (!s.config.policy_path.empty()) {
    try {
      if (fs::exists(s.config.policy_path) || !o.save) policy = TrustPolicy::load(s.config.policy_path);
    } catch (const std::exception& e) {
      return usage_error(s, std::string("bad trust policy: ") + e.what());
    }
  }

  SystemClock clock;
  JwksKeyCache keys(clock);
  VerifyOptions options;
  if (o.interactive) {
    options.on_unknown_issuer = [&](const std::string& issuer, const IctClaims& claims) {
      s.io.err << "Issuer " << issuer << " (subject " << claims.subject
               << ") is not in your trust policy.\nTrust it for this verification? [y/N] " << std::flush;
      std::string answer;
      std::getline(s.io.in, answer);
      answer = trim(answer);
      const bool yes = answer == "y" || answer == "Y" || answer == "yes";
      if (yes && o.save) {
        policy.set(issuer, TrustEntry{OpClass::authoritative, {}, {}, 0});
        policy.save(s.config.policy_path);
      }
      return yes;
    };
  }
  const auto result = verify_ict(trim(*raw), keys.as_lookup(), policy, o.context, clock, options);
  print_result(s, result);
  if (!result.accepted) {
    return report_error(s, result.rejection_reason ? to_string(*result.rejection_reason) : "rejected", result.detail,
                        kExitFailure);
  }
  return kExitOk;
}

// demos ------------------------------------------------------------------------

struct DemoOptions {
  std::string initiator = "alice";
  std::string initiator_password = "alice-password";
  std::string responder = "bob";
  std::string responder_password = "bob-password";
  bool long_term = false;
  bool revoke = false;
};

// Runs `body` against external services when both URLs are configured, or
// against an in-process stack otherwise.
int with_services(const Session& s, const std::function<int(const std::string& op, const std::string& issuer,
                                                            const TrustPolicy& policy, const KeyLookup& keys)>& body) {
  SystemClock clock;
  try {
    if (!s.config.op_stub_url.empty() && !s.config.issuer_url.empty()) {
      TrustPolicy policy;
      if (!s.config.policy_path.empty()) {
        policy = TrustPolicy::load(s.config.policy_path);
      } else {
        policy.set(s.config.op_stub_url, TrustEntry{OpClass::authoritative, {"email"}, {}, 1});
      }
      JwksKeyCache keys(clock);
      return body(s.config.op_stub_url, s.config.issuer_url, policy, keys.as_lookup());
    }
    LocalStack stack(clock);
    s.io.out << "started op-stub at " << stack.op_url() << " and /ict at " << stack.issuer_url() << '\n';
    return body(stack.op_url(), stack.issuer_url(), stack.default_policy(), stack.key_lookup());
  } catch (const Error& e) {
    return protocol_error(s, e);
  }
}

void print_line(const Session& s, const std::string& label, const AuthenticationResult& r) {
  s.io.out << label << ": " << (r.accepted ? "accepted" : "rejected");
  if (r.accepted) {
    s.io.out << " (" << r.subject << " via " << r.issuer << ")";
  } else if (r.rejection_reason) {
    s.io.out << " [" << to_string(*r.rejection_reason) << "]";
  }
  s.io.out << '\n';
}

int cmd_demo_vc(const Session& s, const DemoOptions& o) {
  return with_services(s, [&](const std::string& op, const std::string& issuer, const TrustPolicy& policy,
                              const KeyLookup& keys) {
    SystemClock clock;
    const auto key_a = generate_signing_keypair(SignatureAlgorithm::es256, KeyKind::ephemeral);
    const auto key_b = generate_signing_keypair(SignatureAlgorithm::es256, KeyKind::ephemeral);
    const auto ict_a = obtain_ict(op, issuer, o.initiator, o.initiator_password, key_a, {"vc"}, clock, kVcValiditySeconds);
    const auto ict_b = obtain_ict(op, issuer, o.responder, o.responder_password, key_b, {"vc"}, clock, kVcValiditySeconds);
    s.io.out << "1. both clients obtained vc ICTs\n";

    auto [hello, pending] = vc_initiate(key_a, ict_a, o.responder, clock);
    s.io.out << "2. initiator sent session " << hello.session_id.value << '\n';
    const auto response = vc_respond(hello, key_b, ict_b, policy, keys, clock);
    print_line(s, "3. responder verified initiator", response.result);
    if (!response.reply) return kExitFailure;

    const auto mutual = vc_complete(pending, *response.reply, policy, keys, clock);
    print_line(s, "4. initiator verified responder", mutual.peer);
    if (!mutual.peer.accepted) return kExitFailure;
    s.io.out << "   channel keys: " << mutual.own_channel_key->thumbprint() << " <-> "
             << mutual.peer_channel_key->thumbprint() << '\n';

    // A response relayed into a different session must not complete it.
    auto [other_hello, other_pending] = vc_initiate(key_a, ict_a, o.responder, clock);
    (void)other_hello;
    const auto relayed = vc_complete(other_pending, *response.reply, policy, keys, clock);
    print_line(s, "5. relayed response in a second session", relayed.peer);
    return relayed.peer.accepted ? kExitFailure : kExitOk;
  });
}

int cmd_demo_im(const Session& s, const DemoOptions& o) {
  return with_services(s, [&](const std::string& op, const std::string& issuer, const TrustPolicy& policy,
                              const KeyLookup& keys) {
    SystemClock clock;
    // The messenger's existing identity key doubles as the ICT key.
    const auto channel_key = generate_signing_keypair(SignatureAlgorithm::es256, KeyKind::ephemeral);
    const auto ict = obtain_ict(op, issuer, o.initiator, o.initiator_password, channel_key, {"im"}, clock,
                                kImValiditySeconds);
    s.io.out << "1. client obtained an im ICT for its channel key\n";
    const auto receipt = clock.now();
    const auto bound = im_bind_channel(channel_key.public_part, ict, policy, keys, receipt);
    print_line(s, "2. peer bound ICT to the channel key", bound);

    const auto mitm_key = generate_signing_keypair(SignatureAlgorithm::es256, KeyKind::ephemeral);
    const auto mitm = im_bind_channel(mitm_key.public_part, ict, policy, keys, receipt);
    print_line(s, "3. same ICT on a man-in-the-middle channel", mitm);

    const auto late = im_bind_channel(channel_key.public_part, ict, policy, keys, receipt + kImValiditySeconds + 1);
    print_line(s, "4. ICT received after its expiry", late);
    return bound.accepted && !mitm.accepted && !late.accepted ? kExitOk : kExitFailure;
  });
}

int cmd_demo_email(const Session& s, const DemoOptions& o) {
  std::optional<RevocationListServer> revocations;
  if (o.long_term) {
    revocations.emplace();
    revocations->start();
  }
  return with_services(s, [&](const std::string& op, const std::string& issuer, const TrustPolicy& policy,
                              const KeyLookup& keys) {
    SystemClock clock;
    std::optional<std::string> rev;
    if (revocations) rev = revocations->url();
    const auto key = generate_signing_keypair(SignatureAlgorithm::es256,
                                              rev ? KeyKind::long_term : KeyKind::ephemeral, rev);
    const auto ict = obtain_ict(op, issuer, o.initiator, o.initiator_password, key, {"email"}, clock,
                                kEmailValiditySeconds);
    s.io.out << "1. sender obtained an email ICT (" << to_string(key.kind) << " key)\n";
    const auto msg = email_sign(to_bytes("Hello Bob,\n\nthe contract is attached.\n"),
                                {to_bytes("%PDF-1.7 contract")}, key, ict, clock);
    s.io.out << "2. signed message: " << msg.to_json().dump().size() << " bytes on the wire\n";

    const auto inbox = clock.now() + 60;
    const auto two_days = FixedClock(clock.now() + 48 * 3600);
    const auto trusted = email_verify(msg, policy, keys, inbox, true, two_days);
    print_line(s, "3. verified 48 h later with trusted inbox time", trusted);
    const auto untrusted = email_verify(msg, policy, keys, inbox, false, two_days);
    print_line(s, "4. verified 48 h later without inbox time", untrusted);

    auto tampered = msg;
    tampered.attachments[0][0] ^= 0x01;
    const auto forged = email_verify(tampered, policy, keys, inbox, true, clock);
    print_line(s, "5. attachment modified in transit", forged);

    bool ok = trusted.accepted && !forged.accepted;
    if (revocations && o.revoke) {
      revocations->revoke(key.public_part.thumbprint());
      const auto after = email_verify(msg, policy, keys, inbox, true, clock);
      print_line(s, "6. after revoking the long-term key", after);
      ok = ok && !after.accepted;
    }
    return ok ? kExitOk : kExitFailure;
  });
}

// bench ------------------------------------------------------------------------

struct BenchCliOptions {
  std::string experiment;
  double duration = 60;
  int runs = 20;
  std::string out;
  std::string user = "alice";
  std::string password = "alice-password";
  std::string client_alg = "es256";
};

int cmd_bench(const Session& s, const BenchCliOptions& o) {
  Experiment kind{};
  SignatureAlgorithm alg{};
  try {
    kind = parse_experiment(o.experiment);
    alg = parse_algorithm(o.client_alg);
  } catch (const std::exception& e) {
    return usage_error(s, e.what());
  }
  if (o.duration <= 0 || o.runs <= 0) return usage_error(s, "--duration and --runs must be positive");

  auto run = [&](const std::string& op, const std::string& issuer) {
    BenchTarget target{op, issuer, o.user, o.password};
    target.client_algorithm = alg;
    return run_experiment(kind, target, o.duration, o.runs, [&](int run, std::int64_t count) {
      s.io.err << "run " << run + 1 << "/" << o.runs << ": " << count << " requests\n";
    });
  };
  try {
    BenchReport report;
    if (!s.config.op_stub_url.empty()) {
      if (kind == Experiment::ict_request && s.config.issuer_url.empty()) {
        return usage_error(s, "experiment b needs --issuer");
      }
      report = run(s.config.op_stub_url, s.config.issuer_url);
    } else {
      SystemClock clock;
      LocalStack stack(clock);
      report = run(stack.op_url(), stack.issuer_url());
    }
    if (report.degenerate_interval) s.io.err << "warning: fewer than two runs, confidence interval is degenerate\n";
    const auto text = report.to_json().dump(2);
    if (!o.out.empty() && !write_file(o.out, text + "\n")) {
      return report_error(s, "io", "cannot write " + o.out, kExitFailure);
    }
    s.io.out << text << '\n';
    return kExitOk;
  } catch (const Error& e) {
    return protocol_error(s, e);
  }
}

// stub / serve ---------------------------------------------------------------

struct StubOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string users;
  std::string key;
  std::string issuer_url;
  std::string snapshot;
};

int cmd_stub(const Session& s, const StubOptions& o) {
  try {
    auto users = o.users.empty() ? default_stub_users() : load_stub_users_file(o.users);
    std::optional<PrivateKey> key;
    if (!o.key.empty()) {
      if (const auto pem = read_file(o.key)) {
        key = PrivateKey::from_pem(*pem);
      } else {
        key = PrivateKey::generate(SignatureAlgorithm::rs256);
        if (!write_file(o.key, key->to_pem(), fs::perms::owner_read | fs::perms::owner_write)) {
          return report_error(s, "io", "cannot write " + o.key, kExitFailure);
        }
      }
    } else {
      key = PrivateKey::generate(SignatureAlgorithm::rs256);
    }
    const auto issuer = o.issuer_url.empty() ? "http://" + o.host + ":" + std::to_string(o.port) : o.issuer_url;
    SystemClock clock;
    OpStub stub(issuer, std::move(users), KeyPairDescriptor::from_private(*key), clock);
    if (!o.snapshot.empty() && fs::exists(o.snapshot)) stub.load_snapshot(o.snapshot);
    OpStubServer server(stub);
    install_stop_handler([&server] { server.stop(); });
    s.io.out << "op-stub " << issuer << " (kid " << stub.key_id() << ") listening on " << o.host << ":" << o.port
             << std::endl;
    server.run(o.host, o.port);
    if (!o.snapshot.empty()) stub.save_snapshot(o.snapshot);
    return kExitOk;
  } catch (const Error& e) {
    return protocol_error(s, e);
  } catch (const std::exception& e) {
    return report_error(s, "startup", e.what(), kExitFailure);
  }
}

struct ServeOptions {
  std::string config;
  std::string host = "127.0.0.1";
  int port = 8081;
  std::string userinfo_url;
  std::string key_id;
};

int cmd_serve(const Session& s, const ServeOptions& o) {
  try {
    std::optional<IssuerConfig> config;
    if (!o.config.empty()) {
      config = IssuerConfig::load(o.config);
    } else {
      if (s.config.key_path.empty() || s.config.issuer_url.empty()) {
        return usage_error(s, "pass --config (or OIDC2_ISSUER_CONFIG), or --key and --issuer-url");
      }
      const auto pem = read_file(s.config.key_path);
      if (!pem) return report_error(s, "io", "cannot read " + s.config.key_path, kExitFailure);
      auto key = KeyPairDescriptor::from_private(PrivateKey::from_pem(*pem));
      const auto kid = key.public_part.thumbprint();
      config.emplace(IssuerConfig{.issuer_url = s.config.issuer_url,
                                  .op_signing_key = std::move(key),
                                  .key_id = kid,
                                  .userinfo_url = join_url(s.config.issuer_url, "/userinfo")});
    }
    if (!s.config.issuer_url.empty()) config->issuer_url = s.config.issuer_url;
    if (!o.userinfo_url.empty()) config->userinfo_url = o.userinfo_url;
    if (!o.key_id.empty()) config->key_id = o.key_id;
    config->validate();

    SystemClock clock;
    IssuerServer server(*config, clock);
    install_stop_handler([&server] { server.stop(); });
    s.io.out << "/ict for " << config->issuer_url << " listening on " << o.host << ":" << o.port
             << " (test-grade: the OP signing key is held by this process)" << std::endl;
    server.run(o.host, o.port);
    return kExitOk;
  } catch (const Error& e) {
    return protocol_error(s, e);
  } catch (const std::exception& e) {
    return report_error(s, "startup", e.what(), kExitFailure);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, Streams io) {
  Session session{io, {}};
  auto& cfg = session.config;

  CLI::App app{"OpenID Connect identity certification tokens: issue, verify, and exercise end-to-end flows", "oidc2"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  KeygenOptions keygen;
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate a client key pair (PEM private, JWK public)");
  keygen_cmd->add_option("--alg", keygen.alg, "rs256 or es256");
  keygen_cmd->add_option("--kind", keygen.kind, "ephemeral or long-term");
  keygen_cmd->add_option("--rev-srv", keygen.rev_srv, "Key revocation server (long-term keys)");
  keygen_cmd->add_option("--out", keygen.out, "Output path prefix");

  RequestOptions request;
  auto* request_cmd = app.add_subcommand("request-ict", "Request an ICT from an /ict endpoint");
  request_cmd->add_option("--issuer", cfg.issuer_url, "Base URL of the /ict service")->envname("OIDC2_ISSUER_URL");
  request_cmd->add_option("--op", cfg.op_stub_url, "Base URL of the OpenID Provider")->envname("OIDC2_OP_URL");
  request_cmd->add_option("--token", request.token, "Access token")->envname("OIDC2_ACCESS_TOKEN");
  request_cmd->add_option("--user", request.user, "Username for the password grant");
  request_cmd->add_option("--password", request.password, "Password for the password grant");
  request_cmd->add_option("--scope", request.scopes, "Scopes to request (default: openid profile e2e_auth_<ctx>)");
  request_cmd->add_option("--key", cfg.key_path, "Client private key (PEM)")->envname("OIDC2_KEY");
  request_cmd->add_option("--context", request.contexts, "Context the ICT is for")->required();
  request_cmd->add_option("--validity", request.validity, "Requested validity in seconds");
  request_cmd->add_option("--kind", request.kind, "ephemeral or long-term");
  request_cmd->add_option("--rev-srv", request.rev_srv, "Key revocation server (long-term keys)");
  request_cmd->add_option("--reuse-pop", request.reuse_pop, "Testing: reuse the PoP stored in this file");
  request_cmd->add_option("--out", request.out, "Also write the ICT to this file");

  VerifyCliOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Verify an ICT as the authenticating party");
  verify_cmd->add_option("--ict", verify.ict_path, "File holding the ICT, or - for stdin")->required();
  verify_cmd->add_option("--context", verify.context, "Expected context")->required();
  verify_cmd->add_option("--policy", cfg.policy_path, "Trust policy file")->envname("OIDC2_POLICY");
  verify_cmd->add_flag("--interactive", verify.interactive, "Ask before rejecting an unknown issuer");
  verify_cmd->add_flag("--save", verify.save, "Persist interactive trust decisions to the policy");

  DemoOptions demo;
  std::vector<CLI::App*> demo_cmds;
  for (auto [name, help] : {std::pair{"demo-vc", "Mutual video-conference handshake"},
                            std::pair{"demo-im", "Instant-messaging channel binding"},
                            std::pair{"demo-email", "Signed email authentication"}}) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--op", cfg.op_stub_url, "External OpenID Provider (default: in-process stub)");
    cmd->add_option("--issuer", cfg.issuer_url, "External /ict service");
    cmd->add_option("--policy", cfg.policy_path, "Trust policy file");
    demo_cmds.push_back(cmd);
  }
  demo_cmds[2]->add_flag("--long-term", demo.long_term, "Use a long-term key with a revocation server");
  demo_cmds[2]->add_flag("--revoke", demo.revoke, "Revoke the long-term key and verify again");

  BenchCliOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Closed-loop throughput of /token (a) or /ict (b)");
  bench_cmd->add_option("--experiment", bench.experiment, "a or b")->required();
  bench_cmd->add_option("--duration", bench.duration, "Seconds per run");
  bench_cmd->add_option("--runs", bench.runs, "Number of runs");
  bench_cmd->add_option("--out", bench.out, "Write the report JSON here");
  bench_cmd->add_option("--op", cfg.op_stub_url, "OpenID Provider base URL (default: in-process stub)");
  bench_cmd->add_option("--issuer", cfg.issuer_url, "/ict service base URL");
  bench_cmd->add_option("--user", bench.user, "Username");
  bench_cmd->add_option("--password", bench.password, "Password");
  bench_cmd->add_option("--client-alg", bench.client_alg, "Client key algorithm for experiment b");

  StubOptions stub;
  auto* stub_cmd = app.add_subcommand("stub", "Run the mock OpenID Provider");
  stub_cmd->add_option("--host", stub.host);
  stub_cmd->add_option("--port", stub.port);
  stub_cmd->add_option("--users", stub.users, "Seed user fixture (JSON)");
  stub_cmd->add_option("--key", stub.key, "Signing key PEM; generated and written if missing");
  stub_cmd->add_option("--issuer-url", stub.issuer_url, "Issuer identifier (default http://host:port)");
  stub_cmd->add_option("--snapshot", stub.snapshot, "Token table snapshot, loaded at start and saved at exit");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the /ict issuance service");
  serve_cmd->add_option("--config", serve.config, "Issuer config file")->envname(kIssuerConfigEnv);
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--issuer-url", cfg.issuer_url, "Issuer identifier override");
  serve_cmd->add_option("--userinfo-url", serve.userinfo_url, "Userinfo endpoint override");
  serve_cmd->add_option("--key", cfg.key_path, "OP signing key PEM override");
  serve_cmd->add_option("--key-id", serve.key_id, "kid override");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  cfg.output_format = format == "json" ? OutputFormat::json : OutputFormat::text;

  try {
    if (keygen_cmd->parsed()) return cmd_keygen(session, keygen);
    if (request_cmd->parsed()) return cmd_request_ict(session, request);
    if (verify_cmd->parsed()) return cmd_verify(session, verify);
    if (demo_cmds[0]->parsed()) return cmd_demo_vc(session, demo);
    if (demo_cmds[1]->parsed()) return cmd_demo_im(session, demo);
    if (demo_cmds[2]->parsed()) return cmd_demo_email(session, demo);
    if (bench_cmd->parsed()) return cmd_bench(session, bench);
    if (stub_cmd->parsed()) return cmd_stub(session, stub);
    if (serve_cmd->parsed()) return cmd_serve(session, serve);
  } catch (const Error& e) {
    return protocol_error(session, e);
  } catch (const std::exception& e) {
    return report_error(session, "internal", e.what(), kExitFailure);
  }
  return kExitUsage;
}

}  // namespace oidc2::cli
