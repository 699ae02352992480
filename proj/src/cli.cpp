// Copyright 2026 The Pirus Authors
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

#include "pirus/cli.hpp"

#include "pirus/api.hpp"
#include "pirus/config.hpp"
#include "pirus/records.hpp"
#include "pirus/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <thread>

namespace pirus::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::string data_dir;
};

// Config problems are runtime failures (exit 2), unlike argument errors.
struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Config load_config(const Common& c) {
  try {
    auto cfg = Config::load(c.config_path);
    if (!c.data_dir.empty()) cfg.data_dir = fs::absolute(c.data_dir);
    cfg.validate();
    return cfg;
  } catch (const Error& e) {
    throw ConfigFailure(e.what());
  }
}

/// Creates data_dir if missing. Its parent must already exist.
void ensure_data_dir(const Config& cfg) {
  std::error_code ec;
  if (fs::is_directory(cfg.data_dir, ec)) return;
  if (!fs::create_directory(cfg.data_dir, ec) || ec)
    throw ConfigFailure("cannot create data_dir " + cfg.data_dir.string() +
                        (ec ? ": " + ec.message() : std::string()));
}

struct Offline {
  explicit Offline(const Config& cfg) : lock(StoreLock::acquire(cfg.data_dir)), service(cfg.service_options()) {}
  StoreLock lock;
  Service service;
};

UserId user_id_for(Service& svc, const std::string& username) {
  auto u = svc.identity().find_user_by_name(username);
  if (!u) fail(Errc::NotFound, "no such user: " + username);
  return u->user_id;
}

int cmd_bootstrap(const Common& c, const std::string& user, const std::string& pass, std::ostream& out) {
  const auto cfg = load_config(c);
  ensure_data_dir(cfg);
  Offline o(cfg);
  if (o.service.identity().user_count() > 0) fail(Errc::Conflict, "store already bootstrapped");
  const auto u =
      o.service.identity().create_user(system_actor(), user, pass, Role::Admin, cfg.default_quota_bytes);
  out << u.user_id << '\n';
  return kOk;
}

int cmd_user_add(const Common& c, const std::string& user, const std::string& role, const std::string& pass,
                 std::optional<std::uint64_t> quota, std::ostream& out) {
  const auto r = parse_role(role);
  const auto cfg = load_config(c);
  ensure_data_dir(cfg);
  Offline o(cfg);
  const auto u = o.service.identity().create_user(system_actor(), user, pass, r,
                                                  quota.value_or(cfg.default_quota_bytes));
  out << u.user_id << '\n';
  return kOk;
}

int cmd_user_set_quota(const Common& c, const std::string& user, std::uint64_t bytes) {
  const auto cfg = load_config(c);
  Offline o(cfg);
  UserPatch p;
  p.quota_bytes = bytes;
  o.service.identity().update_user(system_actor(), user_id_for(o.service, user), p);
  return kOk;
}

int cmd_user_disable(const Common& c, const std::string& user) {
  const auto cfg = load_config(c);
  Offline o(cfg);
  UserPatch p;
  p.status = UserStatus::Disabled;
  o.service.identity().update_user(system_actor(), user_id_for(o.service, user), p);
  return kOk;
}

int cmd_user_list(const Common& c, std::ostream& out) {
  const auto cfg = load_config(c);
  Offline o(cfg);
  for (const auto& u : o.service.identity().list_users(system_actor())) {
    out << u.username << '\t' << to_string(u.role) << '\t' << to_string(u.status) << '\t' << u.quota_bytes
        << '\t' << o.service.quota().usage(u.user_id) << '\n';
  }
  return kOk;
}

int cmd_gc(const Common& c, std::ostream& out) {
  const auto cfg = load_config(c);
  Offline o(cfg);
  const auto r = o.service.gc();
  out << r.blobs_removed << ' ' << r.bytes_reclaimed << '\n';
  return kOk;
}

int cmd_fsck(const Common& c, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(c);
  Offline o(cfg);
  const auto r = o.service.fsck();
  const char* status = r.corrupt() ? "corrupt" : r.repaired() ? "repaired" : "clean";
  nlohmann::json j{{"status", status},
                   {"blobs_checked", r.blobs_checked},
                   {"corrupt_blobs", r.corrupt_blobs},
                   {"missing_blobs", r.missing_blobs},
                   {"refcounts_repaired", r.refcounts_repaired},
                   {"entries_restored", r.entries_restored},
                   {"usage_repaired", r.usage_repaired},
                   {"reservations_released", r.reservations_released},
                   {"orphans_removed", r.orphans_removed},
                   {"tree_errors", r.tree_errors},
                   {"version_errors", r.version_errors}};
  out << j.dump(2) << '\n';
  for (const auto& h : r.corrupt_blobs) err << "corrupt blob " << h << '\n';
  for (const auto& h : r.missing_blobs) err << "missing blob " << h << '\n';
  for (const auto& e : r.tree_errors) err << "tree: " << e << '\n';
  for (const auto& e : r.version_errors) err << "versions: " << e << '\n';
  return r.exit_code();
}

int cmd_serve(const Common& c, const std::string& listen, const std::string& webui_dir, std::ostream& err) {
  auto cfg = load_config(c);
  if (!listen.empty()) cfg.listen_addr = listen;
  const auto [host, port] = cfg.listen_host_port();
  ensure_data_dir(cfg);

  // Block termination signals before any thread starts so that only the
  // waiter below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);
  struct RestoreMask {
    sigset_t mask;
    ~RestoreMask() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  Offline o(cfg);
  if (!o.service.identity().any_admin()) {
    err << "pirus: no administrator exists; run `pirus bootstrap --config PATH --admin-user U --admin-pass P`\n";
    return kRuntime;
  }
  if (const auto n = o.service.recover()) err << "pirus: released " << n << " stale reservations\n";

  ApiOptions api;
  api.allowed_origin = cfg.allowed_origin;
  if (!webui_dir.empty()) api.static_dir = webui_dir;
  ApiServer server(o.service, api);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    err << "pirus: BIND_ERROR: cannot listen on " << cfg.listen_addr << '\n';
    return kRuntime;
  }
  err << "pirus: listening on " << host << ':' << bound << '\n';

  std::atomic<bool> finished{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (finished) return;
    server.wait_until_ready();
    server.stop();
  });
  const bool ok = server.run();
  finished = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  err << "pirus: stopped\n";
  return ok ? kOk : kRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pirus: self-hosted file hosting service", "pirus"};
  app.require_subcommand(1);

  Common common;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "JSON config file")->required();
    cmd->add_option("--data-dir", common.data_dir, "Override data_dir");
  };

  auto* serve = app.add_subcommand("serve", "Run the HTTP server");
  add_common(serve);
  std::string listen, webui_dir;
  serve->add_option("--listen", listen, "Override listen_addr (host:port)");
  serve->add_option("--webui-dir", webui_dir, "Serve static UI assets from this directory")->check(CLI::ExistingDirectory);

  auto* bootstrap = app.add_subcommand("bootstrap", "Create the first administrator");
  add_common(bootstrap);
  std::string admin_user, admin_pass;
  bootstrap->add_option("--admin-user", admin_user)->required();
  bootstrap->add_option("--admin-pass", admin_pass)->required();

  auto* user = app.add_subcommand("user", "Offline user administration");
  user->require_subcommand(1);
  std::string username, role, password;
  std::uint64_t bytes = 0;
  std::optional<std::uint64_t> quota;

  auto* add = user->add_subcommand("add", "Create a user");
  add_common(add);
  add->add_option("username", username)->required();
  add->add_option("role", role, "admin | supervisor | member")->required();
  add->add_option("--password", password)->required();
  add->add_option("--quota", quota, "Quota in bytes (default from config)");

  auto* set_quota = user->add_subcommand("set-quota", "Change a user's quota");
  add_common(set_quota);
  set_quota->add_option("username", username)->required();
  set_quota->add_option("bytes", bytes)->required();

  auto* disable = user->add_subcommand("disable", "Disable a user");
  add_common(disable);
  disable->add_option("username", username)->required();

  auto* list = user->add_subcommand("list", "List users (TSV)");
  add_common(list);

  auto* gc = app.add_subcommand("gc", "Release stale reservations and sweep unreferenced blobs");
  add_common(gc);
  auto* fsck = app.add_subcommand("fsck", "Verify and repair the store");
  add_common(fsck);

  std::vector<const char*> argv{"pirus"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*serve) return cmd_serve(common, listen, webui_dir, err);
    if (*bootstrap) return cmd_bootstrap(common, admin_user, admin_pass, out);
    if (*add) return cmd_user_add(common, username, role, password, quota, out);
    if (*set_quota) return cmd_user_set_quota(common, username, bytes);
    if (*disable) return cmd_user_disable(common, username);
    if (*list) return cmd_user_list(common, out);
    if (*gc) return cmd_gc(common, out);
    if (*fsck) return cmd_fsck(common, out, err);
  } catch (const ConfigFailure& e) {
    err << "pirus: " << e.what() << '\n';
    return kRuntime;
  } catch (const Error& e) {
    err << "pirus: " << to_string(e.code()) << ": " << e.what() << '\n';
    // Bad arguments (short password, malformed name, unknown role) are usage errors.
    return e.code() == Errc::Invalid ? kUsage : kRuntime;
  } catch (const std::exception& e) {
    err << "pirus: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace pirus::cli
