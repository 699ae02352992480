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

#pragma once

#include "pirus/access.hpp"
#include "pirus/blobstore.hpp"
#include "pirus/catalog.hpp"
#include "pirus/identity.hpp"
#include "pirus/links.hpp"
#include "pirus/meta_store.hpp"
#include "pirus/quota.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pirus {

/// Points in the upload pipeline where a fault hook is invoked.
enum class UploadStage {
  Reserved,   // quota reserved, nothing written
  Streaming,  // first chunk written to the temp file
  Staged,     // temp file complete and fsynced
  Published,  // payload addressable, reference held by the reservation
  Committed,  // version and usage committed
};

std::string_view to_string(UploadStage s) noexcept;

struct ServiceOptions {
  std::filesystem::path data_dir;
  std::chrono::seconds session_ttl{86400};
  std::uint64_t default_quota_bytes = 1073741824;
  std::uint64_t max_upload_bytes = 104857600;
  std::uint32_t password_iterations = 100000;
  std::chrono::seconds reservation_ttl{3600};
  bool verify_on_read = false;
  Clock clock = system_now;
  /// Test hook; may throw or terminate the process.
  std::function<void(UploadStage)> fault_hook;
};

/// Target of an upload: a new file in a folder, or a new version of a file.
struct UploadRequest {
  std::optional<NodeId> parent;
  std::string name;
  std::optional<NodeId> file;
  std::uint64_t content_length = 0;
  std::string comment;

  static UploadRequest new_file(NodeId parent, std::string name, std::uint64_t length,
                                std::string comment = {}) {
    return {std::move(parent), std::move(name), std::nullopt, length, std::move(comment)};
  }
  static UploadRequest new_version(NodeId file, std::uint64_t length, std::string comment = {}) {
    return {std::nullopt, {}, std::move(file), length, std::move(comment)};
  }
};

struct UploadResult {
  Node node;
  FileVersion version;
};

using ChunkSink = std::function<void(std::span<const std::uint8_t>)>;
/// Pushes the request body into the sink, chunk by chunk. Throws on a
/// transport failure.
using BodySource = std::function<void(const ChunkSink&)>;

struct FsckReport {
  std::uint64_t blobs_checked = 0;
  std::vector<std::string> corrupt_blobs;
  std::vector<std::string> missing_blobs;
  std::vector<std::string> refcounts_repaired;
  std::vector<std::string> entries_restored;
  std::vector<std::string> usage_repaired;
  std::uint64_t reservations_released = 0;
  std::uint64_t orphans_removed = 0;
  std::vector<std::string> tree_errors;
  std::vector<std::string> version_errors;

  bool corrupt() const noexcept {
    return !corrupt_blobs.empty() || !missing_blobs.empty() || !tree_errors.empty() ||
           !version_errors.empty();
  }
  bool repaired() const noexcept {
    return !refcounts_repaired.empty() || !entries_restored.empty() || !usage_repaired.empty() ||
           reservations_released > 0 || orphans_removed > 0;
  }
  /// 0 clean, 3 repaired, 2 corrupt.
  int exit_code() const noexcept { return corrupt() ? 2 : repaired() ? 3 : 0; }
};

/// Exclusive advisory lock on a data directory (flock on `pirus.lock`).
class StoreLock {
 public:
  /// Throws Error(Conflict) if another process holds the lock.
  static StoreLock acquire(const std::filesystem::path& data_dir);
  StoreLock(StoreLock&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  StoreLock& operator=(StoreLock&&) = delete;
  ~StoreLock();

 private:
  explicit StoreLock(int fd) : fd_(fd) {}
  int fd_;
};

/// All modules wired over one data directory.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  meta::MetaStore& meta() { return *meta_; }
  BlobStore& blobs() { return *blobs_; }
  AccessControl& access() { return *access_; }
  Quota& quota() { return *quota_; }
  Catalog& catalog() { return *catalog_; }
  Links& links() { return *links_; }
  Identity& identity() { return *identity_; }
  const ServiceOptions& options() const noexcept { return options_; }

  /// reserve -> stream to blob (hash while writing) -> publish -> commit
  /// version and usage in one transaction. Any failure after the
  /// reservation releases it, dropping the blob reference it held.
  UploadResult upload(const UserId& actor, const UploadRequest& request, const BodySource& body);
  UploadResult upload(const UserId& actor, const UploadRequest& request, std::span<const std::uint8_t> bytes);
  UploadResult upload(const UserId& actor, const UploadRequest& request, std::string_view bytes) {
    return upload(actor, request,
                  std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  }

  /// Opens a version's bytes after a read-rights check.
  std::pair<FileVersion, BlobReader> open_version(const UserId& actor, const NodeId& file,
                                                  std::optional<std::int64_t> version);

  /// Releases expired reservations, then sweeps refcount-0 blobs.
  GcReport gc();

  /// Startup recovery: releases reservations older than reservation_ttl.
  std::uint64_t recover();

  /// Full consistency check with ledger repair. Requires exclusive access.
  FsckReport fsck();

 private:
  ServiceOptions options_;
  std::unique_ptr<meta::MetaStore> meta_;
  std::unique_ptr<BlobStore> blobs_;
  std::unique_ptr<AccessControl> access_;
  std::unique_ptr<Quota> quota_;
  std::unique_ptr<Catalog> catalog_;
  std::unique_ptr<Links> links_;
  std::unique_ptr<Identity> identity_;
};

}  // namespace pirus
