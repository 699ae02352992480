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

#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pirus::testing {

/// Plain-data mirror of users, groups, tree and shares, evaluated by brute
/// force: every share is checked against every ancestor of the queried node.
struct AclWorld {
  struct NodeRec {
    std::optional<std::string> parent;
    std::string owner;
  };
  struct ShareRec {
    std::string node;
    bool to_group = false;
    std::string grantee;
    bool read = false;
    bool write = false;
  };

  std::map<std::string, NodeRec> nodes;
  std::set<std::string> admins;
  std::map<std::string, std::set<std::string>> groups;  // group id -> member user ids
  std::vector<ShareRec> shares;                          // at most one per (node, grantee)

  void put_share(ShareRec s) {
    for (auto& e : shares)
      if (e.node == s.node && e.to_group == s.to_group && e.grantee == s.grantee) {
        e = s;
        return;
      }
    shares.push_back(std::move(s));
  }

  void drop_share(const std::string& node, bool to_group, const std::string& grantee) {
    std::erase_if(shares, [&](const ShareRec& e) {
      return e.node == node && e.to_group == to_group && e.grantee == grantee;
    });
  }

  Access rights(const std::string& user, const std::string& node) const {
    const auto& n = nodes.at(node);
    if (n.owner == user || admins.count(user)) return Access::Owner;
    bool read = false, write = false;
    for (const auto& s : shares) {
      const bool applies = s.to_group ? groups.count(s.grantee) && groups.at(s.grantee).count(user)
                                      : s.grantee == user;
      if (!applies) continue;
      // Walk the whole ancestor chain of `node` looking for the share's node.
      for (std::optional<std::string> cur = node; cur; cur = nodes.at(*cur).parent) {
        if (*cur == s.node) {
          read = read || s.read || s.write;
          write = write || s.write;
          break;
        }
      }
    }
    return write ? Access::Write : read ? Access::Read : Access::None;
  }
};

/// Full scans over the metadata tables with plain SQL, independent of the
/// quota and blob modules' bookkeeping.
struct ScanOracle {
  /// Sum of size_bytes over all versions of all files owned by `user`.
  static std::uint64_t usage(meta::MetaStore& m, const UserId& user) {
    return m.read([&](meta::Txn& t) {
      auto st = t.query(
          "SELECT COALESCE(SUM(v.size_bytes), 0) FROM versions v JOIN nodes n ON n.node_id = v.file_id "
          "WHERE n.owner_id = ?",
          user);
      st.step();
      return static_cast<std::uint64_t>(st.integer(0));
    });
  }

  /// Hash -> number of live references (versions + pending reservations).
  static std::map<std::string, std::uint64_t> live_refs(meta::MetaStore& m) {
    return m.read([&](meta::Txn& t) {
      std::map<std::string, std::uint64_t> refs;
      auto st = t.query("SELECT blob_hash FROM versions");
      while (st.step()) ++refs[st.text(0)];
      auto rs = t.query("SELECT blob_hash FROM reservations WHERE state = 'pending' AND blob_hash IS NOT NULL");
      while (rs.step()) ++refs[rs.text(0)];
      return refs;
    });
  }

  /// Hash -> (refcount, size) as recorded in the blob index.
  static std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> blob_rows(meta::MetaStore& m) {
    return m.read([&](meta::Txn& t) {
      std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> rows;
      auto st = t.query("SELECT hash, refcount, size_bytes FROM blobs");
      while (st.step())
        rows[st.text(0)] = {static_cast<std::uint64_t>(st.integer(1)), static_cast<std::uint64_t>(st.integer(2))};
      return rows;
    });
  }

  static std::uint64_t pending_reservations(meta::MetaStore& m) {
    return m.read([&](meta::Txn& t) {
      auto st = t.query("SELECT COUNT(*) FROM reservations WHERE state = 'pending'");
      st.step();
      return static_cast<std::uint64_t>(st.integer(0));
    });
  }

  static std::uint64_t ledger(meta::MetaStore& m, const UserId& user) {
    return m.read([&](meta::Txn& t) {
      auto st = t.query("SELECT used_bytes FROM usage WHERE user_id = ?", user);
      return st.step() ? static_cast<std::uint64_t>(st.integer(0)) : 0;
    });
  }
};

}  // namespace pirus::testing
