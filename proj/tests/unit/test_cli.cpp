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
#include "pirus/service.hpp"

#include "../support/env.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <regex>
#include <sstream>

namespace pirus {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct CliTest : ::testing::Test {
  testing::TempDir dir;
  fs::path config = dir.path() / "pirus.json";

  void SetUp() override { write_config(R"("data_dir": "data", "password_hash_iterations": 1000)"); }

  void write_config(const std::string& body) { std::ofstream(config) << "{" << body << "}"; }

  Outcome pirus(std::vector<std::string> args) {
    args.push_back("--config");
    args.push_back(config.string());
    return run(std::move(args));
  }

  void bootstrap() { ASSERT_EQ(pirus({"bootstrap", "--admin-user", "root", "--admin-pass", "rootpass1"}).code, 0); }
};

TEST(CliUsage, MissingOrUnknownSubcommand) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"gc"}).code, cli::kUsage);  // --config is required
  EXPECT_EQ(run({"user"}).code, cli::kUsage);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  EXPECT_NE(help.out.find("bootstrap"), std::string::npos);
}

TEST_F(CliTest, BootstrapOnce) {
  EXPECT_EQ(pirus({"bootstrap", "--admin-user", "root", "--admin-pass", "short"}).code, cli::kUsage);
  const auto ok = pirus({"bootstrap", "--admin-user", "root", "--admin-pass", "rootpass1"});
  EXPECT_EQ(ok.code, cli::kOk);
  EXPECT_TRUE(is_uuid(ok.out.substr(0, ok.out.size() - 1))) << ok.out;
  EXPECT_TRUE(fs::is_directory(dir.path() / "data"));
  const auto again = pirus({"bootstrap", "--admin-user", "other", "--admin-pass", "rootpass1"});
  EXPECT_EQ(again.code, cli::kRuntime);
  EXPECT_NE(again.err.find("CONFLICT"), std::string::npos);
}

TEST_F(CliTest, ConfigProblemsAreRuntimeErrors) {
  EXPECT_EQ(run({"gc", "--config", (dir.path() / "nope.json").string()}).code, cli::kRuntime);
  write_config(R"("data_dir": "data", "bogus": true)");
  EXPECT_EQ(pirus({"gc"}).code, cli::kRuntime);
  write_config(R"("data_dir": "missing-parent/data")");
  EXPECT_EQ(pirus({"bootstrap", "--admin-user", "root", "--admin-pass", "rootpass1"}).code, cli::kRuntime);
}

TEST_F(CliTest, DataDirOverride) {
  const auto other = dir.path() / "elsewhere";
  EXPECT_EQ(pirus({"bootstrap", "--admin-user", "root", "--admin-pass", "rootpass1", "--data-dir", other.string()}).code,
            cli::kOk);
  EXPECT_TRUE(fs::exists(other));
  EXPECT_FALSE(fs::exists(dir.path() / "data"));
}

TEST_F(CliTest, UserAdministration) {
  bootstrap();
  EXPECT_EQ(pirus({"user", "add", "alice", "member", "--password", "alicepass", "--quota", "500"}).code, cli::kOk);
  EXPECT_EQ(pirus({"user", "add", "bob", "supervisor", "--password", "bobspass1"}).code, cli::kOk);
  EXPECT_EQ(pirus({"user", "add", "alice", "member", "--password", "alicepass"}).code, cli::kRuntime);
  EXPECT_EQ(pirus({"user", "add", "carol", "overlord", "--password", "carolpass"}).code, cli::kUsage);
  EXPECT_EQ(pirus({"user", "add", "carol", "member"}).code, cli::kUsage);
  EXPECT_EQ(pirus({"user", "set-quota", "alice", "900"}).code, cli::kOk);
  EXPECT_EQ(pirus({"user", "set-quota", "nobody", "900"}).code, cli::kRuntime);
  EXPECT_EQ(pirus({"user", "set-quota", "alice", "lots"}).code, cli::kUsage);
  EXPECT_EQ(pirus({"user", "disable", "bob"}).code, cli::kOk);

  const auto list = pirus({"user", "list"});
  ASSERT_EQ(list.code, cli::kOk);
  EXPECT_EQ(list.out,
            "alice\tmember\tactive\t900\t0\n"
            "bob\tsupervisor\tdisabled\t1073741824\t0\n"
            "root\tadmin\tactive\t1073741824\t0\n");
}

TEST_F(CliTest, GcAndFsck) {
  bootstrap();
  const auto gc = pirus({"gc"});
  EXPECT_EQ(gc.code, cli::kOk);
  EXPECT_EQ(gc.out, "0 0\n");

  auto fsck = pirus({"fsck"});
  EXPECT_EQ(fsck.code, 0);
  EXPECT_EQ(nlohmann::json::parse(fsck.out)["status"], "clean");

  // Seed a file, then damage the usage ledger: repaired (3), then clean.
  BlobHash hash;
  {
    Service svc(testing::test_options(dir.path() / "data"));
    const auto u = svc.identity().create_user(system_actor(), "alice", testing::kPassword, Role::Member, 1000);
    const auto root = svc.meta().read([&](meta::Txn& t) {
      auto st = t.query("SELECT node_id FROM nodes WHERE owner_id = ? AND parent_id IS NULL", u.user_id);
      st.step();
      return NodeId(st.text(0));
    });
    hash = svc.upload(u.user_id, UploadRequest::new_file(root, "f", 4, ""), std::string_view("data")).version.blob_hash;
    svc.meta().write([&](meta::Txn& t) {
      t.exec("UPDATE usage SET used_bytes = 1 WHERE user_id = ?", u.user_id);
      return 0;
    });
  }
  fsck = pirus({"fsck"});
  EXPECT_EQ(fsck.code, cli::kRepaired);
  EXPECT_EQ(nlohmann::json::parse(fsck.out)["usage_repaired"], nlohmann::json::array({"alice"}));
  EXPECT_EQ(pirus({"fsck"}).code, 0);

  // Corrupt the payload: 2, with the hash on stderr.
  const auto payload = dir.path() / "data" / "blobs" / hash.str().substr(0, 2) / hash.str();
  std::ofstream(payload, std::ios::trunc) << "DATA";
  fsck = pirus({"fsck"});
  EXPECT_EQ(fsck.code, cli::kRuntime);
  EXPECT_EQ(nlohmann::json::parse(fsck.out)["status"], "corrupt");
  EXPECT_NE(fsck.err.find("corrupt blob " + hash.str()), std::string::npos);
}

TEST_F(CliTest, ServeRefusesWithoutAdmin) {
  const auto r = pirus({"serve", "--listen", "127.0.0.1:0"});
  EXPECT_EQ(r.code, cli::kRuntime);
  EXPECT_NE(r.err.find("bootstrap"), std::string::npos);
}

TEST_F(CliTest, ServeReportsBindError) {
  bootstrap();
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(fd, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const auto port = std::to_string(ntohs(addr.sin_port));
  const auto r = pirus({"serve", "--listen", "127.0.0.1:" + port});
  ::close(fd);
  EXPECT_EQ(r.code, cli::kRuntime);
  EXPECT_NE(r.err.find("BIND_ERROR"), std::string::npos);
}

// The real binary: serve, talk HTTP, hold the lock, stop on SIGTERM.
TEST_F(CliTest, ServeBinaryLifecycle) {
  bootstrap();
  int err_pipe[2];
  ASSERT_EQ(::pipe(err_pipe), 0);
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::close(err_pipe[0]);
    ::execl(PIRUS_BINARY, "pirus", "serve", "--config", config.c_str(), "--listen", "127.0.0.1:0",
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(err_pipe[1]);

  std::string log;
  int port = -1;
  const std::regex listening("listening on 127\\.0\\.0\\.1:(\\d+)");
  char buf[256];
  while (port < 0) {
    const auto n = ::read(err_pipe[0], buf, sizeof buf);
    if (n <= 0) break;
    log.append(buf, static_cast<std::size_t>(n));
    std::smatch m;
    if (std::regex_search(log, m, listening)) port = std::stoi(m[1]);
  }
  ASSERT_GT(port, 0) << log;

  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/api/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  const auto login = client.Post("/api/v1/auth/login", R"({"username":"root","password":"rootpass1"})",
                                 "application/json");
  ASSERT_TRUE(login);
  EXPECT_EQ(login->status, 200);

  // Offline commands refuse while the server holds the data directory.
  const auto gc = pirus({"gc"});
  EXPECT_EQ(gc.code, cli::kRuntime);
  EXPECT_NE(gc.err.find("in use"), std::string::npos);

  ASSERT_EQ(::kill(pid, SIGTERM), 0);
  int status = 0;
  ASSERT_EQ(::waitpid(pid, &status, 0), pid);
  ::close(err_pipe[0]);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_EQ(pirus({"gc"}).code, cli::kOk);
}

}  // namespace
}  // namespace pirus
