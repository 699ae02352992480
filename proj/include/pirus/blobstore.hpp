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

#include "pirus/crypto.hpp"
#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pirus {

class BlobStore;

struct BlobEntry {
  BlobHash hash;
  std::uint64_t size_bytes = 0;
  std::uint64_t refcount = 0;
};

/// Bytes durably written to a temp file and hashed, not yet addressable.
/// Destroying an unpublished blob removes the temp file.
class StagedBlob {
 public:
  StagedBlob() = default;
  StagedBlob(StagedBlob&& other) noexcept;
  StagedBlob& operator=(StagedBlob&& other) noexcept;
  ~StagedBlob();

  const BlobHash& hash() const noexcept { return hash_; }
  std::uint64_t size() const noexcept { return size_; }

 private:
  friend class BlobStore;
  friend class BlobWriter;
  void discard() noexcept;

  BlobStore* store_ = nullptr;
  std::filesystem::path temp_;
  BlobHash hash_;
  std::uint64_t size_ = 0;
};

/// Streams bytes into a temp file while hashing them (single pass).
class BlobWriter {
 public:
  BlobWriter(BlobStore& store, std::uint64_t max_bytes);
  BlobWriter(BlobWriter&& other) noexcept;
  BlobWriter& operator=(BlobWriter&&) = delete;
  ~BlobWriter();

  /// Throws SIZE_LIMIT once the running total exceeds max_bytes.
  void write(std::span<const std::uint8_t> bytes);
  void write(std::string_view bytes) {
    write(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  }
  std::uint64_t written() const noexcept { return written_; }

  /// fsyncs and closes the temp file.
  StagedBlob finish();

 private:
  void abandon() noexcept;

  BlobStore* store_;
  std::uint64_t max_bytes_;
  std::filesystem::path temp_;
  int fd_ = -1;
  crypto::Sha256 hasher_;
  std::uint64_t written_ = 0;
};

/// Sequential reader over a stored payload.
class BlobReader {
 public:
  BlobReader(int fd, std::uint64_t size) : fd_(fd), size_(size) {}
  BlobReader(BlobReader&& other) noexcept : fd_(std::exchange(other.fd_, -1)), size_(other.size_) {}
  BlobReader& operator=(BlobReader&&) = delete;
  ~BlobReader();

  std::uint64_t size() const noexcept { return size_; }
  /// Returns 0 at end of stream.
  std::size_t read(std::span<std::uint8_t> out);
  /// Positioned read, independent of the sequential cursor.
  std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) const;
  std::vector<std::uint8_t> read_all();

 private:
  int fd_;
  std::uint64_t size_;
};

/// Content-addressed, refcounted payload storage.
///
/// Payloads live at `<data_dir>/blobs/<hash[0..2]>/<hash>` (raw bytes, no
/// header); temp writes go to `<data_dir>/tmp/`. Refcounts are rows in the
/// metadata store so they change atomically with the versions that own them.
/// Deletion happens only in gc_sweep, which holds the sweep lock exclusively
/// against publish.
class BlobStore {
 public:
  BlobStore(std::filesystem::path data_dir, meta::MetaStore& meta, std::uint64_t max_upload_bytes,
            bool verify_on_read = false);

  BlobWriter writer() { return BlobWriter(*this, max_upload_bytes_); }

  /// Makes a staged blob addressable and adds one reference. If the hash is
  /// already stored the bytes are not rewritten. `then` runs in the same
  /// metadata transaction as the refcount increment.
  BlobHash publish(StagedBlob&& staged, const std::function<void(meta::Txn&)>& then = {});

  std::pair<BlobHash, std::uint64_t> put(std::span<const std::uint8_t> bytes);
  std::pair<BlobHash, std::uint64_t> put(std::string_view bytes) {
    return put(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  }
  std::pair<BlobHash, std::uint64_t> put(std::istream& in);

  /// NOT_FOUND if no entry; CORRUPT if verify-on-read is enabled and fails.
  BlobReader open(const BlobHash& hash) const;

  std::uint64_t decref(const BlobHash& hash);
  std::uint64_t decref(const meta::Txn& t, const BlobHash& hash);
  /// Adds a reference to an existing entry (restores share a blob).
  void incref(const meta::Txn& t, const BlobHash& hash);

  std::optional<BlobEntry> entry(const BlobHash& hash) const;
  std::optional<BlobEntry> entry(const meta::Txn& t, const BlobHash& hash) const;
  std::vector<BlobEntry> entries() const;

  GcReport gc_sweep();

  /// NOT_FOUND if no entry. A missing payload file verifies false.
  bool verify(const BlobHash& hash) const;

  std::filesystem::path payload_path(const BlobHash& hash) const;
  const std::filesystem::path& blobs_dir() const noexcept { return blobs_dir_; }
  const std::filesystem::path& tmp_dir() const noexcept { return tmp_dir_; }
  std::uint64_t max_upload_bytes() const noexcept { return max_upload_bytes_; }

  /// Removes temp files not owned by a live writer and payload files that
  /// have no metadata entry. Returns the number removed.
  std::uint64_t remove_orphans();

 private:
  friend class BlobWriter;
  friend class StagedBlob;

  std::filesystem::path new_temp_path();
  void forget_temp(const std::filesystem::path& p);
  bool rehash_matches(const std::filesystem::path& p, const BlobHash& hash) const;
  std::uint64_t remove_orphans_locked();

  std::filesystem::path blobs_dir_;
  std::filesystem::path tmp_dir_;
  meta::MetaStore& meta_;
  std::uint64_t max_upload_bytes_;
  bool verify_on_read_;

  std::shared_mutex sweep_mu_;
  std::mutex temps_mu_;
  std::set<std::filesystem::path> live_temps_;
};

}  // namespace pirus
