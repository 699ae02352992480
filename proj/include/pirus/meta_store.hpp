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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace pirus {

template <class Tag>
class Id;
class BlobHash;

namespace meta {

/// Prepared statement. Bind indices are 1-based, columns 0-based (SQLite).
class Statement {
 public:
  Statement(sqlite3* db, std::string_view sql);
  ~Statement();
  Statement(Statement&& other) noexcept;
  Statement& operator=(Statement&&) = delete;
  Statement(const Statement&) = delete;

  Statement& bind(int index, std::int64_t value);
  Statement& bind(int index, std::string_view value);
  Statement& bind(int index, std::nullopt_t);
  Statement& bind(int index, const char* value) { return bind(index, std::string_view(value)); }
  Statement& bind(int index, const std::string& value) { return bind(index, std::string_view(value)); }
  Statement& bind(int index, bool value) { return bind(index, std::int64_t{value ? 1 : 0}); }
  Statement& bind(int index, int value) { return bind(index, std::int64_t{value}); }
  Statement& bind(int index, std::uint64_t value) { return bind(index, static_cast<std::int64_t>(value)); }
  Statement& bind(int index, std::uint32_t value) { return bind(index, std::int64_t{value}); }
  Statement& bind_blob(int index, const std::vector<std::uint8_t>& value);
  Statement& bind(int index, const std::vector<std::uint8_t>& value) { return bind_blob(index, value); }
  template <class Tag>
  Statement& bind(int index, const Id<Tag>& id) {
    return bind(index, std::string_view(id.str()));
  }
  Statement& bind(int index, const BlobHash& hash);
  template <class T>
  Statement& bind(int index, const std::optional<T>& value) {
    return value ? bind(index, *value) : bind(index, std::nullopt);
  }

  /// Advances to the next row; false when done.
  bool step();
  /// Runs to completion, discarding rows.
  void run();

  bool is_null(int col) const;
  std::int64_t integer(int col) const;
  std::string text(int col) const;
  std::vector<std::uint8_t> blob(int col) const;

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

/// A live transaction. Only valid inside MetaStore::read/write callbacks.
class Txn {
 public:
  explicit Txn(sqlite3* db, bool writable) : db_(db), writable_(writable) {}

  Statement prepare(std::string_view sql) const { return Statement(db_, sql); }

  template <class... Args>
  Statement query(std::string_view sql, const Args&... args) const {
    Statement st(db_, sql);
    int index = 1;
    (st.bind(index++, args), ...);
    return st;
  }

  /// Executes a statement and returns the number of rows changed.
  template <class... Args>
  std::int64_t exec(std::string_view sql, const Args&... args) const {
    query(sql, args...).run();
    return changes();
  }

  std::int64_t changes() const;
  bool writable() const noexcept { return writable_; }

 private:
  sqlite3* db_;
  bool writable_;
};

/// Crash-safe embedded metadata store. Writes are serialized through one
/// connection; reads use pooled connections and see committed snapshots.
class MetaStore {
 public:
  static std::unique_ptr<MetaStore> open(const std::filesystem::path& meta_dir);
  ~MetaStore();

  MetaStore(const MetaStore&) = delete;
  MetaStore& operator=(const MetaStore&) = delete;

  template <class F>
  auto write(F&& fn) -> std::invoke_result_t<F, Txn&> {
    std::lock_guard lock(write_mu_);
    begin(writer_, true);
    Txn txn(writer_, true);
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F, Txn&>>) {
        fn(txn);
        commit(writer_);
      } else {
        auto result = fn(txn);
        commit(writer_);
        return result;
      }
    } catch (...) {
      rollback(writer_);
      throw;
    }
  }

  template <class F>
  auto read(F&& fn) -> std::invoke_result_t<F, Txn&> {
    Lease lease(*this);
    begin(lease.db, false);
    Txn txn(lease.db, false);
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F, Txn&>>) {
        fn(txn);
        commit(lease.db);
      } else {
        auto result = fn(txn);
        commit(lease.db);
        return result;
      }
    } catch (...) {
      rollback(lease.db);
      throw;
    }
  }

 private:
  explicit MetaStore(std::filesystem::path db_path);

  struct Lease {
    explicit Lease(MetaStore& s);
    ~Lease();
    MetaStore& store;
    sqlite3* db;
  };

  sqlite3* connect(bool writer) const;
  sqlite3* acquire_reader();
  void release_reader(sqlite3* db);
  static void begin(sqlite3* db, bool immediate);
  static void commit(sqlite3* db);
  static void rollback(sqlite3* db) noexcept;

  std::filesystem::path db_path_;
  std::mutex write_mu_;
  sqlite3* writer_ = nullptr;
  std::mutex pool_mu_;
  std::vector<sqlite3*> readers_;
};

}  // namespace meta
}  // namespace pirus
