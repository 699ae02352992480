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

#include "pirus/meta_store.hpp"

#include "pirus/error.hpp"
#include "pirus/ids.hpp"

#include <sqlite3.h>

namespace pirus::meta {

namespace {

constexpr std::size_t kMaxIdleReaders = 16;

// Logical schema. Refcounts, reservations and usage share the transaction
// domain with the catalog so that version+refcount+quota move atomically.
constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS users(
  user_id TEXT PRIMARY KEY,
  username TEXT NOT NULL UNIQUE COLLATE NOCASE,
  kdf_id TEXT NOT NULL,
  salt BLOB NOT NULL,
  iterations INTEGER NOT NULL,
  digest BLOB NOT NULL,
  role TEXT NOT NULL,
  status TEXT NOT NULL,
  quota_bytes INTEGER NOT NULL,
  created_at INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS groups(
  group_id TEXT PRIMARY KEY,
  name TEXT NOT NULL UNIQUE COLLATE NOCASE);
CREATE TABLE IF NOT EXISTS group_members(
  group_id TEXT NOT NULL,
  user_id TEXT NOT NULL,
  PRIMARY KEY(group_id, user_id));
CREATE INDEX IF NOT EXISTS group_members_by_user ON group_members(user_id);
CREATE TABLE IF NOT EXISTS sessions(
  token TEXT PRIMARY KEY,
  user_id TEXT NOT NULL,
  expires_at INTEGER NOT NULL);
CREATE INDEX IF NOT EXISTS sessions_by_user ON sessions(user_id);
CREATE TABLE IF NOT EXISTS nodes(
  node_id TEXT PRIMARY KEY,
  kind TEXT NOT NULL,
  name TEXT NOT NULL,
  parent_id TEXT,
  owner_id TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  modified_at INTEGER NOT NULL);
CREATE UNIQUE INDEX IF NOT EXISTS nodes_by_parent_name ON nodes(parent_id, name);
CREATE INDEX IF NOT EXISTS nodes_by_owner ON nodes(owner_id);
CREATE TABLE IF NOT EXISTS versions(
  file_id TEXT NOT NULL,
  version_number INTEGER NOT NULL,
  blob_hash TEXT NOT NULL,
  size_bytes INTEGER NOT NULL,
  author_id TEXT NOT NULL,
  comment TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  PRIMARY KEY(file_id, version_number));
CREATE INDEX IF NOT EXISTS versions_by_blob ON versions(blob_hash);
CREATE TABLE IF NOT EXISTS blobs(
  hash TEXT PRIMARY KEY,
  size_bytes INTEGER NOT NULL,
  refcount INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS reservations(
  reservation_id TEXT PRIMARY KEY,
  user_id TEXT NOT NULL,
  bytes INTEGER NOT NULL,
  state TEXT NOT NULL,
  blob_hash TEXT,
  created_at INTEGER NOT NULL);
CREATE INDEX IF NOT EXISTS reservations_by_user ON reservations(user_id, state);
CREATE TABLE IF NOT EXISTS usage(
  user_id TEXT PRIMARY KEY,
  used_bytes INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS shares(
  share_id TEXT PRIMARY KEY,
  node_id TEXT NOT NULL,
  grantee_kind TEXT NOT NULL,
  grantee_id TEXT NOT NULL,
  can_read INTEGER NOT NULL,
  can_write INTEGER NOT NULL,
  granted_by TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  UNIQUE(node_id, grantee_kind, grantee_id));
CREATE INDEX IF NOT EXISTS shares_by_grantee ON shares(grantee_kind, grantee_id);
CREATE TABLE IF NOT EXISTS links(
  link_id TEXT PRIMARY KEY,
  owner_id TEXT NOT NULL,
  name TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  modified_at INTEGER NOT NULL,
  UNIQUE(owner_id, name));
CREATE TABLE IF NOT EXISTS link_leaves(
  link_id TEXT NOT NULL,
  position INTEGER NOT NULL,
  node_id TEXT NOT NULL,
  PRIMARY KEY(link_id, node_id));
)sql";

[[noreturn]] void sqlite_fail(sqlite3* db, const std::string& what) {
  const int rc = db ? sqlite3_extended_errcode(db) : SQLITE_ERROR;
  const std::string msg = what + ": " + (db ? sqlite3_errmsg(db) : "sqlite error");
  if ((rc & 0xFF) == SQLITE_CONSTRAINT) fail(Errc::Conflict, msg);
  if ((rc & 0xFF) == SQLITE_IOERR || (rc & 0xFF) == SQLITE_FULL) fail(Errc::IoError, msg);
  if ((rc & 0xFF) == SQLITE_CORRUPT || (rc & 0xFF) == SQLITE_NOTADB) fail(Errc::Corrupt, msg);
  fail(Errc::Internal, msg);
}

void exec_plain(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    sqlite_fail(db, std::string("exec failed (") + msg + ")");
  }
}

}  // namespace

Statement::Statement(sqlite3* db, std::string_view sql) : db_(db) {
  if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK)
    sqlite_fail(db, "prepare failed");
}

Statement::~Statement() { sqlite3_finalize(stmt_); }

Statement::Statement(Statement&& other) noexcept : db_(other.db_), stmt_(other.stmt_) {
  other.stmt_ = nullptr;
}

Statement& Statement::bind(int index, std::int64_t value) {
  if (sqlite3_bind_int64(stmt_, index, value) != SQLITE_OK) sqlite_fail(db_, "bind failed");
  return *this;
}

Statement& Statement::bind(int index, std::string_view value) {
  if (sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()),
                        SQLITE_TRANSIENT) != SQLITE_OK)
    sqlite_fail(db_, "bind failed");
  return *this;
}

Statement& Statement::bind(int index, std::nullopt_t) {
  if (sqlite3_bind_null(stmt_, index) != SQLITE_OK) sqlite_fail(db_, "bind failed");
  return *this;
}

Statement& Statement::bind_blob(int index, const std::vector<std::uint8_t>& value) {
  if (sqlite3_bind_blob(stmt_, index, value.data(), static_cast<int>(value.size()),
                        SQLITE_TRANSIENT) != SQLITE_OK)
    sqlite_fail(db_, "bind failed");
  return *this;
}

Statement& Statement::bind(int index, const BlobHash& hash) { return bind(index, std::string_view(hash.str())); }

bool Statement::step() {
  const int rc = sqlite3_step(stmt_);
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  sqlite_fail(db_, "step failed");
}

void Statement::run() {
  while (step()) {
  }
}

bool Statement::is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

std::int64_t Statement::integer(int col) const { return sqlite3_column_int64(stmt_, col); }

std::string Statement::text(int col) const {
  const auto* p = sqlite3_column_text(stmt_, col);
  const int n = sqlite3_column_bytes(stmt_, col);
  return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(n)) : std::string();
}

std::vector<std::uint8_t> Statement::blob(int col) const {
  const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt_, col));
  const int n = sqlite3_column_bytes(stmt_, col);
  return p ? std::vector<std::uint8_t>(p, p + n) : std::vector<std::uint8_t>();
}

std::int64_t Txn::changes() const { return sqlite3_changes64(db_); }

MetaStore::MetaStore(std::filesystem::path db_path) : db_path_(std::move(db_path)) {}

std::unique_ptr<MetaStore> MetaStore::open(const std::filesystem::path& meta_dir) {
  std::error_code ec;
  std::filesystem::create_directories(meta_dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + meta_dir.string() + ": " + ec.message());
  std::unique_ptr<MetaStore> store(new MetaStore(meta_dir / "pirus.db"));
  store->writer_ = store->connect(true);
  exec_plain(store->writer_, kSchema);
  return store;
}

MetaStore::~MetaStore() {
  for (auto* db : readers_) sqlite3_close_v2(db);
  sqlite3_close_v2(writer_);
}

sqlite3* MetaStore::connect(bool writer) const {
  sqlite3* db = nullptr;
  const int flags = (writer ? SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE : SQLITE_OPEN_READONLY) |
                    SQLITE_OPEN_NOMUTEX;
  if (sqlite3_open_v2(db_path_.c_str(), &db, flags, nullptr) != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close_v2(db);
    fail(Errc::IoError, "cannot open metadata store " + db_path_.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db, 10000);
  if (writer) {
    exec_plain(db, "PRAGMA journal_mode=WAL;");
    exec_plain(db, "PRAGMA synchronous=FULL;");
  }
  return db;
}

sqlite3* MetaStore::acquire_reader() {
  {
    std::lock_guard lock(pool_mu_);
    if (!readers_.empty()) {
      auto* db = readers_.back();
      readers_.pop_back();
      return db;
    }
  }
  return connect(false);
}

void MetaStore::release_reader(sqlite3* db) {
  std::lock_guard lock(pool_mu_);
  if (readers_.size() < kMaxIdleReaders) {
    readers_.push_back(db);
  } else {
    sqlite3_close_v2(db);
  }
}

MetaStore::Lease::Lease(MetaStore& s) : store(s), db(s.acquire_reader()) {}
MetaStore::Lease::~Lease() { store.release_reader(db); }

void MetaStore::begin(sqlite3* db, bool immediate) {
  exec_plain(db, immediate ? "BEGIN IMMEDIATE" : "BEGIN");
}

void MetaStore::commit(sqlite3* db) { exec_plain(db, "COMMIT"); }

void MetaStore::rollback(sqlite3* db) noexcept {
  if (!sqlite3_get_autocommit(db)) sqlite3_exec(db, "ROLLBACK", nullptr, nullptr, nullptr);
}

}  // namespace pirus::meta
