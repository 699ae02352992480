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

#include "pirus/records.hpp"
#include "pirus/service.hpp"

#include "../support/code_of.hpp"
#include "../support/env.hpp"
#include "../support/oracles.hpp"
#include "../support/sha256_ref.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace pirus {
namespace {

namespace fs = std::filesystem;

using testing::code_of;
using testing::ScanOracle;
using testing::Store;

struct Snapshot {
  std::map<std::string, std::uint64_t> live;
  std::uint64_t usage = 0;
  std::uint64_t pending = 0;
  std::size_t versions = 0;
  std::size_t nodes = 0;
  std::size_t temp_files = 0;

  static Snapshot take(Store& s, const UserId& user) {
    Snapshot out;
    out.live = ScanOracle::live_refs(s.svc->meta());
    out.usage = s.svc->quota().usage(user);
    out.pending = ScanOracle::pending_reservations(s.svc->meta());
    s.svc->meta().read([&](meta::Txn& t) {
      auto v = t.query("SELECT COUNT(*) FROM versions");
      v.step();
      out.versions = static_cast<std::size_t>(v.integer(0));
      auto n = t.query("SELECT COUNT(*) FROM nodes");
      n.step();
      out.nodes = static_cast<std::size_t>(n.integer(0));
      return 0;
    });
    const auto tmp = s.svc->options().data_dir / "tmp";
    if (fs::exists(tmp))
      for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp)) ++out.temp_files;
    return out;
  }

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// Every referenced blob row's refcount matches the live references exactly.
void expect_refcounts_consistent(Store& s) {
  const auto live = ScanOracle::live_refs(s.svc->meta());
  const auto rows = ScanOracle::blob_rows(s.svc->meta());
  for (const auto& [hash, row] : rows) {
    const auto it = live.find(hash);
    EXPECT_EQ(row.first, it == live.end() ? 0 : it->second) << hash;
  }
  for (const auto& [hash, n] : live) EXPECT_TRUE(rows.count(hash)) << hash;
}

TEST(Upload, NewFileAndVersion) {
  Store s;
  const auto u = s.add_user("alice");
  const auto r = s.put_file(u.user_id, s.root(u.user_id), "hello.txt", "abc", "first draft");
  EXPECT_EQ(r.node.name, "hello.txt");
  EXPECT_EQ(r.node.kind, NodeKind::File);
  EXPECT_EQ(r.version.version_number, 1);
  EXPECT_EQ(r.version.size_bytes, 3u);
  EXPECT_EQ(r.version.comment, "first draft");
  EXPECT_EQ(r.version.blob_hash.str(), testing::reference_sha256_hex("abc"));
  EXPECT_EQ(s.svc->quota().usage(u.user_id), 3u);
  const auto v2 = s.put_version(u.user_id, r.node.node_id, "abcd");
  EXPECT_EQ(v2.version.version_number, 2);
  EXPECT_EQ(v2.node.node_id, r.node.node_id);
  EXPECT_EQ(s.svc->quota().usage(u.user_id), 7u);
  EXPECT_EQ(ScanOracle::pending_reservations(s.svc->meta()), 0u);
  expect_refcounts_consistent(s);
}

TEST(Upload, DedupAcrossUsersChargesEach) {
  Store s;
  const auto a = s.add_user("alice");
  const auto b = s.add_user("bob");
  const std::string body(5000, 'q');
  const auto ra = s.put_file(a.user_id, s.root(a.user_id), "x", body);
  const auto rb = s.put_file(b.user_id, s.root(b.user_id), "y", body);
  EXPECT_EQ(ra.version.blob_hash, rb.version.blob_hash);
  EXPECT_EQ(s.svc->quota().usage(a.user_id), 5000u);
  EXPECT_EQ(s.svc->quota().usage(b.user_id), 5000u);
  EXPECT_EQ(ScanOracle::blob_rows(s.svc->meta()).at(ra.version.blob_hash.str()).first, 2u);
  EXPECT_EQ(s.svc->blobs().entries().size(), 1u);
}

TEST(Upload, RejectsBeforeReserving) {
  auto opts = testing::test_options({});
  opts.max_upload_bytes = 10;
  Store s(opts);
  const auto u = s.add_user("alice", Role::Member, 100);
  const auto root = s.root(u.user_id);
  const auto other = s.add_user("bob");
  const auto before = Snapshot::take(s, u.user_id);
  EXPECT_EQ(code_of([&] { s.put_file(u.user_id, root, "big", std::string(11, 'x')); }), Errc::SizeLimit);
  EXPECT_EQ(code_of([&] { s.put_file(u.user_id, root, "a/b", "x"); }), Errc::Invalid);
  EXPECT_EQ(code_of([&] { s.put_file(other.user_id, root, "x", "x"); }), Errc::Forbidden);
  EXPECT_EQ(code_of([&] { s.put_file(u.user_id, root, "x", "x", std::string(1025, 'c')); }), Errc::Invalid);
  EXPECT_EQ(code_of([&] { s.put_file(u.user_id, root, "x", "x", "\xC3"); }), Errc::Invalid);
  EXPECT_NO_THROW(s.put_file(u.user_id, root, "ok", "x", std::string(1024, 'c')));
  EXPECT_EQ(code_of([&] { s.put_file(u.user_id, root, "ok", "y"); }), Errc::Conflict);
  EXPECT_EQ(code_of([&] { s.put_version(u.user_id, root, "y"); }), Errc::Invalid);
  EXPECT_EQ(code_of([&] { s.svc->upload(u.user_id, UploadRequest{}, std::string_view("x")); }), Errc::Invalid);
  auto after = Snapshot::take(s, u.user_id);
  EXPECT_EQ(after.pending, before.pending);
  EXPECT_EQ(after.usage, 1u);
}

TEST(Upload, QuotaExceededLeavesNoTrace) {
  Store s;
  const auto u = s.add_user("alice", Role::Member, 10);
  const auto root = s.root(u.user_id);
  s.put_file(u.user_id, root, "a", "123456");
  const auto before = Snapshot::take(s, u.user_id);
  EXPECT_EQ(code_of([&] { s.put_file(u.user_id, root, "b", "12345"); }), Errc::QuotaExceeded);
  EXPECT_EQ(Snapshot::take(s, u.user_id), before);
  EXPECT_NO_THROW(s.put_file(u.user_id, root, "b", "1234"));
}

TEST(Upload, BodyLongerThanDeclaredIsRejected) {
  Store s;
  const auto u = s.add_user("alice");
  const auto before = Snapshot::take(s, u.user_id);
  const std::string body = "0123456789";
  const auto req = UploadRequest::new_file(s.root(u.user_id), "f", 5, "");
  EXPECT_EQ(code_of([&] { s.svc->upload(u.user_id, req, std::string_view(body)); }), Errc::Invalid);
  EXPECT_EQ(Snapshot::take(s, u.user_id), before);
}

TEST(Upload, ShorterBodyCommitsActualSize) {
  Store s;
  const auto u = s.add_user("alice");
  const auto req = UploadRequest::new_file(s.root(u.user_id), "f", 100, "");
  const auto r = s.svc->upload(u.user_id, req, std::string_view("abc"));
  EXPECT_EQ(r.version.size_bytes, 3u);
  EXPECT_EQ(s.svc->quota().usage(u.user_id), 3u);
}

TEST(Upload, ChunkedSourceMatchesOneShot) {
  Store s;
  const auto u = s.add_user("alice");
  std::mt19937_64 rng(3);
  const auto data = testing::random_bytes(rng, 300000);
  const auto req = UploadRequest::new_file(s.root(u.user_id), "f", data.size(), "");
  const auto r = s.svc->upload(u.user_id, req, [&](const ChunkSink& sink) {
    std::size_t off = 0;
    while (off < data.size()) {
      const auto n = std::min<std::size_t>(data.size() - off, 1 + rng() % 9000);
      sink(std::span(reinterpret_cast<const std::uint8_t*>(data.data()) + off, n));
      off += n;
    }
  });
  EXPECT_EQ(r.version.blob_hash.str(), testing::reference_sha256_hex(data));
  EXPECT_EQ(s.read_file(u.user_id, r.node.node_id), data);
}

TEST(Upload, BodySourceErrorReleasesReservation) {
  Store s;
  const auto u = s.add_user("alice");
  const auto before = Snapshot::take(s, u.user_id);
  const auto req = UploadRequest::new_file(s.root(u.user_id), "f", 10, "");
  EXPECT_THROW(s.svc->upload(u.user_id, req,
                             [](const ChunkSink& sink) {
                               sink(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("abc"), 3));
                               throw std::runtime_error("client went away");
                             }),
               std::runtime_error);
  EXPECT_EQ(Snapshot::take(s, u.user_id), before);
}

struct InjectedFault : std::runtime_error {
  InjectedFault() : std::runtime_error("injected") {}
};

class FaultStages : public ::testing::TestWithParam<UploadStage> {};

TEST_P(FaultStages, FailureRollsBackCompletely) {
  std::optional<UploadStage> armed;
  auto opts = testing::test_options({});
  opts.fault_hook = [&](UploadStage stage) {
    if (armed && *armed == stage) throw InjectedFault();
  };
  Store s(opts);
  const auto u = s.add_user("alice");
  const auto root = s.root(u.user_id);
  const auto existing = s.put_file(u.user_id, root, "existing", "old bytes");

  for (const bool as_version : {false, true}) {
    const auto before = Snapshot::take(s, u.user_id);
    const auto rows_before = ScanOracle::blob_rows(s.svc->meta());
    armed = GetParam();
    const std::string body = "fresh content " + std::to_string(as_version);
    const auto req = as_version ? UploadRequest::new_version(existing.node.node_id, body.size(), "")
                                : UploadRequest::new_file(root, "new", body.size(), "");
    EXPECT_THROW(s.svc->upload(u.user_id, req, std::string_view(body)), InjectedFault);
    armed.reset();
    const auto after = Snapshot::take(s, u.user_id);

    if (GetParam() == UploadStage::Committed) {
      // The hook fires after the commit: the upload is durable.
      EXPECT_EQ(after.versions, before.versions + 1);
      EXPECT_EQ(after.usage, before.usage + body.size());
      EXPECT_EQ(after.pending, 0u);
    } else {
      EXPECT_EQ(after, before) << to_string(GetParam());
      // Published bytes may remain as an unreferenced entry until GC.
      s.svc->gc();
      EXPECT_EQ(ScanOracle::blob_rows(s.svc->meta()), rows_before);
    }
    expect_refcounts_consistent(s);
    EXPECT_EQ(s.svc->fsck().exit_code(), 0);
  }
}

INSTANTIATE_TEST_SUITE_P(AllStages, FaultStages,
                         ::testing::Values(UploadStage::Reserved, UploadStage::Streaming, UploadStage::Staged,
                                           UploadStage::Published, UploadStage::Committed),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Gc, NeverRemovesLiveBlobs) {
  Store s;
  const auto u = s.add_user("alice");
  const auto root = s.root(u.user_id);
  std::mt19937_64 rng(8);
  std::vector<NodeId> files;
  for (int i = 0; i < 20; ++i) {
    const auto r = s.put_file(u.user_id, root, "f" + std::to_string(i), testing::random_bytes(rng, rng() % 2000));
    files.push_back(r.node.node_id);
    if (rng() % 2) s.put_version(u.user_id, r.node.node_id, testing::random_bytes(rng, rng() % 2000));
  }
  for (int i = 0; i < 8; ++i) s.svc->catalog().delete_node(u.user_id, files[i]);
  const auto report = s.svc->gc();
  EXPECT_GT(report.blobs_removed, 0u);
  for (std::size_t i = 8; i < files.size(); ++i)
    for (const auto& v : s.svc->catalog().get_versions(u.user_id, files[i])) {
      const auto bytes = s.read_file(u.user_id, files[i], v.version_number);
      EXPECT_EQ(crypto::sha256_hex(bytes), v.blob_hash.str());
    }
  for (const auto& [hash, row] : ScanOracle::blob_rows(s.svc->meta())) EXPECT_GT(row.first, 0u);
  EXPECT_EQ(s.svc->gc().blobs_removed, 0u);
}

TEST(Recover, ReleasesStaleReservationsOnly) {
  Timestamp now = from_millis(9'000'000);
  auto opts = testing::test_options({});
  opts.clock = [&] { return now; };
  opts.reservation_ttl = std::chrono::seconds(60);
  Store s(opts);
  const auto u = s.add_user("alice");
  s.svc->quota().reserve(u.user_id, 5);
  now += std::chrono::seconds(61);
  s.svc->quota().reserve(u.user_id, 5);
  EXPECT_EQ(s.svc->recover(), 1u);
  EXPECT_EQ(ScanOracle::pending_reservations(s.svc->meta()), 1u);
}

struct FsckTest : ::testing::Test {
  Store s;
  User alice = s.add_user("alice");
  UploadResult file = s.put_file(alice.user_id, s.root(alice.user_id), "f", "payload");
  fs::path payload() { return s.svc->blobs().payload_path(file.version.blob_hash); }
};

TEST_F(FsckTest, CleanStore) {
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_EQ(r.blobs_checked, 1u);
}

TEST_F(FsckTest, RepairsRefcountDrift) {
  s.svc->meta().write([&](meta::Txn& t) {
    t.exec("UPDATE blobs SET refcount = 7 WHERE hash = ?", file.version.blob_hash);
    return 0;
  });
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_EQ(r.refcounts_repaired, std::vector<std::string>{file.version.blob_hash.str()});
  expect_refcounts_consistent(s);
  EXPECT_EQ(s.svc->fsck().exit_code(), 0);
}

TEST_F(FsckTest, RepairsUsageLedger) {
  s.svc->meta().write([&](meta::Txn& t) {
    t.exec("UPDATE usage SET used_bytes = 0 WHERE user_id = ?", alice.user_id);
    return 0;
  });
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_EQ(r.usage_repaired, std::vector<std::string>{"alice"});
  EXPECT_EQ(s.svc->quota().usage(alice.user_id), 7u);
}

TEST_F(FsckTest, ReleasesPendingReservations) {
  s.svc->quota().reserve(alice.user_id, 100);
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.reservations_released, 1u);
  EXPECT_EQ(r.exit_code(), 3);
}

TEST_F(FsckTest, RemovesOrphanPayloads) {
  const auto stray = payload().parent_path().parent_path() / "ab" /
                     "ab00000000000000000000000000000000000000000000000000000000000000";
  fs::create_directories(stray.parent_path());
  std::ofstream(stray) << "junk";
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.orphans_removed, 1u);
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_FALSE(fs::exists(stray));
}

TEST_F(FsckTest, RestoresLostIndexRowFromIntactPayload) {
  s.svc->meta().write([&](meta::Txn& t) {
    t.exec("DELETE FROM blobs WHERE hash = ?", file.version.blob_hash);
    return 0;
  });
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.entries_restored, std::vector<std::string>{file.version.blob_hash.str()});
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_EQ(s.read_file(alice.user_id, file.node.node_id), "payload");
  expect_refcounts_consistent(s);
}

TEST_F(FsckTest, DetectsCorruptPayload) {
  {
    std::fstream f(payload(), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('P');
  }
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.corrupt_blobs, std::vector<std::string>{file.version.blob_hash.str()});
  EXPECT_EQ(r.exit_code(), 2);
}

TEST_F(FsckTest, DetectsMissingPayload) {
  fs::remove(payload());
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.missing_blobs, std::vector<std::string>{file.version.blob_hash.str()});
  EXPECT_EQ(r.exit_code(), 2);
}

TEST_F(FsckTest, DetectsVersionGap) {
  s.put_version(alice.user_id, file.node.node_id, "second");
  s.put_version(alice.user_id, file.node.node_id, "third");
  s.svc->meta().write([&](meta::Txn& t) {
    t.exec("DELETE FROM versions WHERE file_id = ? AND version_number = 2", file.node.node_id);
    return 0;
  });
  const auto r = s.svc->fsck();
  EXPECT_EQ(r.version_errors.size(), 1u);
  EXPECT_EQ(r.exit_code(), 2);
}

TEST_F(FsckTest, DetectsTreeCycle) {
  const auto a = s.svc->catalog().create_folder(alice.user_id, s.root(alice.user_id), "a");
  const auto b = s.svc->catalog().create_folder(alice.user_id, a.node_id, "b");
  s.svc->meta().write([&](meta::Txn& t) {
    t.exec("UPDATE nodes SET parent_id = ? WHERE node_id = ?", b.node_id, a.node_id);
    return 0;
  });
  const auto r = s.svc->fsck();
  EXPECT_FALSE(r.tree_errors.empty());
  EXPECT_EQ(r.exit_code(), 2);
}

TEST(StoreLockTest, SecondAcquireConflicts) {
  testing::TempDir dir;
  auto lock = StoreLock::acquire(dir.path());
  // flock is per open file description, so a second acquire in-process conflicts too.
  EXPECT_EQ(code_of([&] { StoreLock::acquire(dir.path()); }), Errc::Conflict);
  {
    auto moved = std::move(lock);
  }
  EXPECT_NO_THROW(StoreLock::acquire(dir.path()));
}

TEST(ServiceRestart, StatePersistsAcrossInstances) {
  testing::TempDir dir;
  auto opts = testing::test_options(dir.path() / "data");
  NodeId file;
  UserId user;
  {
    Service svc(opts);
    const auto u = svc.identity().create_user(system_actor(), "alice", testing::kPassword, Role::Member, 1000);
    user = u.user_id;
    const auto root = svc.meta().read([&](meta::Txn& t) { return records::root_of(t, u.user_id)->node_id; });
    file = svc.upload(u.user_id, UploadRequest::new_file(root, "f", 5, ""), std::string_view("hello")).node.node_id;
  }
  Service svc(opts);
  auto [v, reader] = svc.open_version(user, file, std::nullopt);
  const auto bytes = reader.read_all();
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "hello");
  EXPECT_EQ(svc.quota().usage(user), 5u);
  EXPECT_EQ(svc.fsck().exit_code(), 0);
}

}  // namespace
}  // namespace pirus
