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

#include "pirus/blobstore.hpp"

#include "pirus/error.hpp"

#include <array>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace pirus {

namespace {

constexpr std::size_t kIoChunk = 64 * 1024;

[[noreturn]] void io_fail(const std::string& what) {
  fail(Errc::IoError, what + ": " + std::strerror(errno));
}

void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) io_fail("open dir " + dir.string());
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) io_fail("fsync dir " + dir.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  if (fs::is_directory(dir, ec)) return;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  fsync_dir(dir.parent_path());
}

std::optional<BlobEntry> entry_row(const meta::Txn& t, const BlobHash& hash) {
  auto st = t.query("SELECT size_bytes, refcount FROM blobs WHERE hash = ?", hash);
  if (!st.step()) return std::nullopt;
  return BlobEntry{hash, static_cast<std::uint64_t>(st.integer(0)),
                   static_cast<std::uint64_t>(st.integer(1))};
}

}  // namespace

// StagedBlob ---------------------------------------------------------------

StagedBlob::StagedBlob(StagedBlob&& other) noexcept
    : store_(std::exchange(other.store_, nullptr)),
      temp_(std::move(other.temp_)),
      hash_(std::move(other.hash_)),
      size_(other.size_) {}

StagedBlob& StagedBlob::operator=(StagedBlob&& other) noexcept {
  if (this != &other) {
    discard();
    store_ = std::exchange(other.store_, nullptr);
    temp_ = std::move(other.temp_);
    hash_ = std::move(other.hash_);
    size_ = other.size_;
  }
  return *this;
}

StagedBlob::~StagedBlob() { discard(); }

void StagedBlob::discard() noexcept {
  if (store_ == nullptr) return;
  std::error_code ec;
  fs::remove(temp_, ec);
  store_->forget_temp(temp_);
  store_ = nullptr;
}

// BlobWriter ---------------------------------------------------------------

BlobWriter::BlobWriter(BlobStore& store, std::uint64_t max_bytes)
    : store_(&store), max_bytes_(max_bytes), temp_(store.new_temp_path()) {
  fd_ = ::open(temp_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0640);
  if (fd_ < 0) {
    store_->forget_temp(temp_);
    io_fail("create temp " + temp_.string());
  }
}

BlobWriter::BlobWriter(BlobWriter&& other) noexcept
    : store_(std::exchange(other.store_, nullptr)),
      max_bytes_(other.max_bytes_),
      temp_(std::move(other.temp_)),
      fd_(std::exchange(other.fd_, -1)),
      hasher_(std::move(other.hasher_)),
      written_(other.written_) {}

BlobWriter::~BlobWriter() { abandon(); }

void BlobWriter::abandon() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (store_ != nullptr) {
    std::error_code ec;
    fs::remove(temp_, ec);
    store_->forget_temp(temp_);
    store_ = nullptr;
  }
}

void BlobWriter::write(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) fail(Errc::Internal, "writer already finished");
  if (bytes.size() > max_bytes_ - written_) fail(Errc::SizeLimit, "payload exceeds max_upload_bytes");
  hasher_.update(bytes);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::write(fd_, bytes.data() + off, bytes.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write temp");
    }
    off += static_cast<std::size_t>(n);
  }
  written_ += bytes.size();
}

StagedBlob BlobWriter::finish() {
  if (fd_ < 0) fail(Errc::Internal, "writer already finished");
  if (::fsync(fd_) != 0) io_fail("fsync temp");
  ::close(fd_);
  fd_ = -1;
  StagedBlob staged;
  staged.store_ = std::exchange(store_, nullptr);
  staged.temp_ = temp_;
  staged.hash_ = BlobHash(crypto::to_hex(hasher_.finish()));
  staged.size_ = written_;
  return staged;
}

// BlobReader ---------------------------------------------------------------

BlobReader::~BlobReader() {
  if (fd_ >= 0) ::close(fd_);
}

std::size_t BlobReader::read(std::span<std::uint8_t> out) {
  for (;;) {
    const ssize_t n = ::read(fd_, out.data(), out.size());
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno != EINTR) io_fail("read blob");
  }
}

std::size_t BlobReader::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const {
  for (;;) {
    const ssize_t n = ::pread(fd_, out.data(), out.size(), static_cast<off_t>(offset));
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno != EINTR) io_fail("read blob");
  }
}

std::vector<std::uint8_t> BlobReader::read_all() {
  std::vector<std::uint8_t> out(size_);
  std::size_t got = 0;
  while (got < out.size()) {
    const auto n = read(std::span(out).subspan(got));
    if (n == 0) fail(Errc::Corrupt, "blob shorter than recorded size");
    got += n;
  }
  return out;
}

// BlobStore ----------------------------------------------------------------

BlobStore::BlobStore(fs::path data_dir, meta::MetaStore& meta, std::uint64_t max_upload_bytes,
                     bool verify_on_read)
    : blobs_dir_(data_dir / "blobs"),
      tmp_dir_(data_dir / "tmp"),
      meta_(meta),
      max_upload_bytes_(max_upload_bytes),
      verify_on_read_(verify_on_read) {
  ensure_dir(blobs_dir_);
  ensure_dir(tmp_dir_);
}

fs::path BlobStore::payload_path(const BlobHash& hash) const {
  return blobs_dir_ / hash.str().substr(0, 2) / hash.str();
}

fs::path BlobStore::new_temp_path() {
  auto p = tmp_dir_ / (make_uuid4() + ".tmp");
  std::lock_guard lock(temps_mu_);
  live_temps_.insert(p);
  return p;
}

void BlobStore::forget_temp(const fs::path& p) {
  std::lock_guard lock(temps_mu_);
  live_temps_.erase(p);
}

BlobHash BlobStore::publish(StagedBlob&& staged, const std::function<void(meta::Txn&)>& then) {
  if (staged.store_ != this) fail(Errc::Internal, "staged blob does not belong to this store");
  std::shared_lock sweep(sweep_mu_);
  const auto final_path = payload_path(staged.hash_);
  std::error_code ec;
  if (fs::exists(final_path, ec)) {
    staged.discard();
  } else {
    ensure_dir(final_path.parent_path());
    if (::rename(staged.temp_.c_str(), final_path.c_str()) != 0) io_fail("publish blob");
    fsync_dir(final_path.parent_path());
    forget_temp(staged.temp_);
    staged.store_ = nullptr;
  }
  const BlobHash hash = staged.hash_;
  const std::uint64_t size = staged.size_;
  meta_.write([&](meta::Txn& t) {
    t.exec(
        "INSERT INTO blobs(hash, size_bytes, refcount) VALUES(?, ?, 1) "
        "ON CONFLICT(hash) DO UPDATE SET refcount = refcount + 1",
        hash, size);
    if (then) then(t);
  });
  return hash;
}

std::pair<BlobHash, std::uint64_t> BlobStore::put(std::span<const std::uint8_t> bytes) {
  auto w = writer();
  for (std::size_t off = 0; off < bytes.size(); off += kIoChunk)
    w.write(bytes.subspan(off, std::min(kIoChunk, bytes.size() - off)));
  auto staged = w.finish();
  const auto size = staged.size();
  auto hash = publish(std::move(staged));
  return {hash, size};
}

std::pair<BlobHash, std::uint64_t> BlobStore::put(std::istream& in) {
  auto w = writer();
  std::array<char, kIoChunk> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto n = static_cast<std::size_t>(in.gcount());
    if (n > 0) w.write(std::string_view(buf.data(), n));
  }
  if (in.bad()) fail(Errc::IoError, "input stream failed");
  auto staged = w.finish();
  const auto size = staged.size();
  auto hash = publish(std::move(staged));
  return {hash, size};
}

BlobReader BlobStore::open(const BlobHash& hash) const {
  const auto e = entry(hash);
  if (!e) fail(Errc::NotFound, "blob not found");
  const auto path = payload_path(hash);
  if (verify_on_read_ && !rehash_matches(path, hash)) fail(Errc::Corrupt, "blob " + hash.str() + " failed verification");
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) {
    if (errno == ENOENT) fail(Errc::Corrupt, "blob payload missing: " + hash.str());
    io_fail("open blob");
  }
  return BlobReader(fd, e->size_bytes);
}

std::uint64_t BlobStore::decref(const BlobHash& hash) {
  return meta_.write([&](meta::Txn& t) { return decref(t, hash); });
}

std::uint64_t BlobStore::decref(const meta::Txn& t, const BlobHash& hash) {
  const auto e = entry_row(t, hash);
  if (!e) fail(Errc::NotFound, "blob not found");
  if (e->refcount == 0) fail(Errc::Underflow, "refcount already zero for " + hash.str());
  t.exec("UPDATE blobs SET refcount = refcount - 1 WHERE hash = ?", hash);
  return e->refcount - 1;
}

void BlobStore::incref(const meta::Txn& t, const BlobHash& hash) {
  if (t.exec("UPDATE blobs SET refcount = refcount + 1 WHERE hash = ?", hash) != 1)
    fail(Errc::NotFound, "blob not found");
}

std::optional<BlobEntry> BlobStore::entry(const BlobHash& hash) const {
  return meta_.read([&](meta::Txn& t) { return entry_row(t, hash); });
}

std::optional<BlobEntry> BlobStore::entry(const meta::Txn& t, const BlobHash& hash) const {
  return entry_row(t, hash);
}

std::vector<BlobEntry> BlobStore::entries() const {
  return meta_.read([&](meta::Txn& t) {
    std::vector<BlobEntry> out;
    auto st = t.query("SELECT hash, size_bytes, refcount FROM blobs ORDER BY hash");
    while (st.step())
      out.push_back({BlobHash(st.text(0)), static_cast<std::uint64_t>(st.integer(1)),
                     static_cast<std::uint64_t>(st.integer(2))});
    return out;
  });
}

GcReport BlobStore::gc_sweep() {
  std::unique_lock sweep(sweep_mu_);
  GcReport report;
  // Rows go first; a crash before the unlinks leaves unindexed payloads that
  // the orphan pass below (or the next sweep) removes.
  const auto doomed = meta_.write([&](meta::Txn& t) {
    std::vector<BlobEntry> out;
    auto st = t.query("SELECT hash, size_bytes FROM blobs WHERE refcount = 0");
    while (st.step())
      out.push_back({BlobHash(st.text(0)), static_cast<std::uint64_t>(st.integer(1)), 0});
    t.exec("DELETE FROM blobs WHERE refcount = 0");
    return out;
  });
  for (const auto& e : doomed) {
    std::error_code ec;
    fs::remove(payload_path(e.hash), ec);
    if (ec) fail(Errc::IoError, "cannot remove " + e.hash.str() + ": " + ec.message());
    ++report.blobs_removed;
    report.bytes_reclaimed += e.size_bytes;
  }
  report.orphans_removed = remove_orphans_locked();
  return report;
}

std::uint64_t BlobStore::remove_orphans() {
  std::unique_lock sweep(sweep_mu_);
  return remove_orphans_locked();
}

std::uint64_t BlobStore::remove_orphans_locked() {
  std::uint64_t removed = 0;
  std::error_code ec;
  std::set<fs::path> live;
  {
    std::lock_guard lock(temps_mu_);
    live = live_temps_;
  }
  for (const auto& de : fs::directory_iterator(tmp_dir_, ec)) {
    if (live.count(de.path()) != 0) continue;
    std::error_code rm;
    if (fs::remove(de.path(), rm)) ++removed;
  }
  std::set<std::string> indexed;
  meta_.read([&](meta::Txn& t) {
    auto st = t.query("SELECT hash FROM blobs");
    while (st.step()) indexed.insert(st.text(0));
  });
  for (const auto& de : fs::recursive_directory_iterator(blobs_dir_, ec)) {
    if (!de.is_regular_file()) continue;
    if (indexed.count(de.path().filename().string()) != 0) continue;
    std::error_code rm;
    if (fs::remove(de.path(), rm)) ++removed;
  }
  return removed;
}

bool BlobStore::verify(const BlobHash& hash) const {
  if (!entry(hash)) fail(Errc::NotFound, "blob not found");
  return rehash_matches(payload_path(hash), hash);
}

bool BlobStore::rehash_matches(const fs::path& p, const BlobHash& hash) const {
  const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) return false;
  BlobReader reader(fd, 0);
  crypto::Sha256 h;
  std::vector<std::uint8_t> buf(kIoChunk);
  for (;;) {
    const auto n = reader.read(buf);
    if (n == 0) break;
    h.update(std::span(buf).first(n));
  }
  return crypto::to_hex(h.finish()) == hash.str();
}

}  // namespace pirus
