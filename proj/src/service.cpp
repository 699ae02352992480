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

#include "pirus/service.hpp"

#include "pirus/crypto.hpp"
#include "pirus/error.hpp"
#include "pirus/records.hpp"
#include "pirus/text.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

namespace pirus {

namespace fs = std::filesystem;

namespace {

bool file_hash_matches(const fs::path& path, const BlobHash& hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  crypto::Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::span(reinterpret_cast<const std::uint8_t*>(buf.data()), static_cast<std::size_t>(in.gcount())));
  }
  return crypto::to_hex(h.finish()) == hash.str();
}

}  // namespace

std::string_view to_string(UploadStage s) noexcept {
  switch (s) {
    case UploadStage::Reserved: return "reserved";
    case UploadStage::Streaming: return "streaming";
    case UploadStage::Staged: return "staged";
    case UploadStage::Published: return "published";
    case UploadStage::Committed: return "committed";
  }
  return "unknown";
}

StoreLock StoreLock::acquire(const fs::path& data_dir) {
  fs::create_directories(data_dir);
  const auto path = data_dir / "pirus.lock";
  const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail(Errc::IoError, "cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    const int err = errno;
    ::close(fd);
    if (err == EWOULDBLOCK) fail(Errc::Conflict, "data directory is in use by another process");
    fail(Errc::IoError, std::string("cannot lock data directory: ") + std::strerror(err));
  }
  return StoreLock(fd);
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) ::close(fd_);
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_now;
  fs::create_directories(options_.data_dir);
  meta_ = meta::MetaStore::open(options_.data_dir / "meta");
  blobs_ = std::make_unique<BlobStore>(options_.data_dir, *meta_, options_.max_upload_bytes,
                                       options_.verify_on_read);
  access_ = std::make_unique<AccessControl>(*meta_, options_.clock);
  quota_ = std::make_unique<Quota>(*meta_, *blobs_, options_.clock);
  catalog_ = std::make_unique<Catalog>(*meta_, *access_, *quota_, *blobs_, options_.clock);
  links_ = std::make_unique<Links>(*meta_, *access_, options_.clock);
  identity_ = std::make_unique<Identity>(
      *meta_, *catalog_, *access_, *links_, *quota_, options_.clock,
      IdentityOptions{options_.password_iterations, options_.session_ttl});
}

Service::~Service() = default;

UploadResult Service::upload(const UserId& actor, const UploadRequest& req, const BodySource& body) {
  if (req.parent.has_value() == req.file.has_value()) fail(Errc::Invalid, "upload needs a parent or a file");
  if (!text::is_valid_utf8(req.comment) || text::utf8_length(req.comment) > 1024)
    fail(Errc::Invalid, "comment must be valid UTF-8 of at most 1024 characters");
  if (req.content_length > options_.max_upload_bytes) fail(Errc::SizeLimit, "upload exceeds size limit");

  // Cheap prechecks so obviously bad requests never reserve quota. The
  // commit transaction repeats them authoritatively.
  const UserId owner = meta_->read([&](meta::Txn& t) {
    if (req.parent) {
      if (!Catalog::valid_name(req.name)) fail(Errc::Invalid, "invalid name");
      return catalog_->check_new_child(t, actor, *req.parent, req.name).owner_id;
    }
    const auto file = access_->require(t, actor, *req.file, Access::Write);
    if (!file.is_file()) fail(Errc::Invalid, "not a file");
    return file.owner_id;
  });

  const auto hook = [&](UploadStage s) {
    if (options_.fault_hook) options_.fault_hook(s);
  };

  const auto reservation = quota_->reserve(owner, req.content_length);
  try {
    hook(UploadStage::Reserved);
    auto writer = blobs_->writer();
    bool first = true;
    body([&](std::span<const std::uint8_t> chunk) {
      if (chunk.size() > req.content_length - writer.written())
        fail(Errc::Invalid, "body longer than declared length");
      writer.write(chunk);
      if (first && !chunk.empty()) {
        first = false;
        hook(UploadStage::Streaming);
      }
    });
    auto staged = writer.finish();
    const auto hash = staged.hash();
    const auto size = staged.size();
    hook(UploadStage::Staged);
    blobs_->publish(std::move(staged), [&](meta::Txn& t) {
      quota_->attach_blob(t, reservation.reservation_id, hash);
    });
    hook(UploadStage::Published);
    auto result = meta_->write([&](meta::Txn& t) {
      UploadResult r;
      if (req.parent) {
        std::tie(r.node, r.version) =
            catalog_->create_file(t, actor, *req.parent, req.name, hash, size, req.comment);
      } else {
        r.version = catalog_->add_version(t, actor, *req.file, hash, size, req.comment);
        r.node = records::load_node(t, *req.file);
      }
      if (r.node.owner_id != owner) fail(Errc::Conflict, "target changed owner during upload");
      quota_->commit(t, reservation.reservation_id, size);
      return r;
    });
    hook(UploadStage::Committed);
    return result;
  } catch (...) {
    // Releasing drops the blob reference, if one was attached. A reservation
    // that already committed rejects release; that is fine.
    try {
      quota_->release(reservation.reservation_id);
    } catch (...) {
    }
    throw;
  }
}

UploadResult Service::upload(const UserId& actor, const UploadRequest& req,
                             std::span<const std::uint8_t> bytes) {
  return upload(actor, req, [bytes](const ChunkSink& sink) {
    constexpr std::size_t kChunk = 64 * 1024;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk)
      sink(bytes.subspan(off, std::min(kChunk, bytes.size() - off)));
  });
}

std::pair<FileVersion, BlobReader> Service::open_version(const UserId& actor, const NodeId& file,
                                                         std::optional<std::int64_t> version) {
  auto v = catalog_->get_version(actor, file, version);
  return {v, blobs_->open(v.blob_hash)};
}

GcReport Service::gc() {
  quota_->release_expired(options_.reservation_ttl);
  return blobs_->gc_sweep();
}

std::uint64_t Service::recover() { return quota_->release_expired(options_.reservation_ttl); }

FsckReport Service::fsck() {
  FsckReport report;
  report.reservations_released = quota_->release_all_pending();

  // Blob payloads against their recorded hashes.
  for (const auto& e : blobs_->entries()) {
    ++report.blobs_checked;
    const auto path = blobs_->payload_path(e.hash);
    std::error_code ec;
    if (!fs::exists(path, ec)) {
      report.missing_blobs.push_back(e.hash.str());
    } else if (!blobs_->verify(e.hash)) {
      report.corrupt_blobs.push_back(e.hash.str());
    }
  }

  meta_->write([&](meta::Txn& t) {
    // Refcounts: one per version plus one per pending reservation holding it.
    std::map<std::string, std::uint64_t> expected;
    std::map<std::string, std::uint64_t> sizes;
    {
      auto st = t.query("SELECT blob_hash, size_bytes FROM versions");
      while (st.step()) {
        ++expected[st.text(0)];
        sizes[st.text(0)] = static_cast<std::uint64_t>(st.integer(1));
      }
      auto rs = t.query(
          "SELECT blob_hash FROM reservations WHERE state = 'pending' AND blob_hash IS NOT NULL");
      while (rs.step()) ++expected[rs.text(0)];
    }
    std::map<std::string, std::uint64_t> actual;
    {
      auto st = t.query("SELECT hash, refcount FROM blobs");
      while (st.step()) actual[st.text(0)] = static_cast<std::uint64_t>(st.integer(1));
    }
    for (const auto& [hash, count] : actual) {
      const auto it = expected.find(hash);
      const std::uint64_t want = it == expected.end() ? 0 : it->second;
      if (want != count) {
        t.exec("UPDATE blobs SET refcount = ? WHERE hash = ?", want, hash);
        report.refcounts_repaired.push_back(hash);
      }
    }
    for (const auto& [hash, count] : expected) {
      if (actual.count(hash)) continue;
      // Referenced but unindexed: recoverable only if the payload is intact.
      const BlobHash h(hash);
      const auto path = blobs_->payload_path(h);
      std::error_code ec;
      const auto on_disk = fs::file_size(path, ec);
      if (ec || on_disk != sizes[hash]) {
        report.missing_blobs.push_back(hash);
        continue;
      }
      if (!file_hash_matches(path, h)) {
        report.corrupt_blobs.push_back(hash);
        continue;
      }
      t.exec("INSERT INTO blobs(hash, size_bytes, refcount) VALUES(?, ?, ?)", h, on_disk, count);
      report.entries_restored.push_back(hash);
    }

    // Tree shape and version density per owner.
    for (const auto& u : records::all_users(t)) {
      const auto nodes = records::nodes_of(t, u.user_id);
      std::map<std::string, const Node*> by_id;
      std::map<std::string, std::vector<const Node*>> kids;
      std::size_t roots = 0;
      for (const auto& n : nodes) by_id[n.node_id.str()] = &n;
      for (const auto& n : nodes) {
        if (n.is_root()) {
          ++roots;
          if (n.is_file()) report.tree_errors.push_back("root is a file: " + n.node_id.str());
          continue;
        }
        const auto p = by_id.find(n.parent_id->str());
        if (p == by_id.end()) {
          report.tree_errors.push_back("parent missing or foreign: " + n.node_id.str());
          continue;
        }
        if (p->second->is_file()) report.tree_errors.push_back("parent is a file: " + n.node_id.str());
        kids[p->first].push_back(&n);
      }
      if (roots != 1)
        report.tree_errors.push_back("user " + u.username + " has " + std::to_string(roots) + " roots");
      // Everything owned must be reachable from the root exactly once.
      std::set<std::string> seen;
      std::vector<const Node*> stack;
      for (const auto& n : nodes)
        if (n.is_root()) stack.push_back(&n);
      while (!stack.empty()) {
        const auto* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n->node_id.str()).second) continue;
        for (const auto* c : kids[n->node_id.str()]) stack.push_back(c);
      }
      for (const auto& n : nodes)
        if (!seen.count(n.node_id.str()))
          report.tree_errors.push_back("unreachable node (cycle?): " + n.node_id.str());

      for (const auto& n : nodes) {
        if (!n.is_file()) continue;
        auto st = t.query("SELECT MIN(version_number), MAX(version_number), COUNT(*) FROM versions "
                          "WHERE file_id = ?",
                          n.node_id);
        st.step();
        const auto count = st.integer(2);
        if (count == 0 || st.integer(0) != 1 || st.integer(1) != count)
          report.version_errors.push_back("versions not dense: " + n.node_id.str());
      }
    }
    auto stray = t.query(
        "SELECT DISTINCT v.file_id FROM versions v LEFT JOIN nodes n ON n.node_id = v.file_id "
        "WHERE n.node_id IS NULL OR n.kind != 'file'");
    while (stray.step()) report.version_errors.push_back("versions without file: " + stray.text(0));
  });

  // Usage ledger against a full scan.
  for (const auto& u : meta_->read([](meta::Txn& t) { return records::all_users(t); })) {
    if (quota_->recompute(u.user_id).repaired()) report.usage_repaired.push_back(u.username);
  }

  report.orphans_removed = blobs_->remove_orphans();
  return report;
}

}  // namespace pirus
