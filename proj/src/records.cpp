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

#include "pirus/error.hpp"

namespace pirus {

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Admin: return "admin";
    case Role::Supervisor: return "supervisor";
    case Role::Member: return "member";
  }
  return "member";
}

std::string_view to_string(UserStatus s) noexcept {
  return s == UserStatus::Active ? "active" : "disabled";
}

Role parse_role(std::string_view text) {
  if (text == "admin") return Role::Admin;
  if (text == "supervisor") return Role::Supervisor;
  if (text == "member") return Role::Member;
  fail(Errc::Invalid, "unknown role");
}

UserStatus parse_user_status(std::string_view text) {
  if (text == "active") return UserStatus::Active;
  if (text == "disabled") return UserStatus::Disabled;
  fail(Errc::Invalid, "unknown status");
}

std::string_view to_string(NodeKind k) noexcept { return k == NodeKind::File ? "file" : "folder"; }

std::string_view to_string(Access a) noexcept {
  switch (a) {
    case Access::None: return "none";
    case Access::Read: return "read";
    case Access::Write: return "write";
    case Access::Owner: return "owner";
  }
  return "none";
}

std::string_view to_string(GranteeKind k) noexcept { return k == GranteeKind::User ? "user" : "group"; }

GranteeKind parse_grantee_kind(std::string_view text) {
  if (text == "user") return GranteeKind::User;
  if (text == "group") return GranteeKind::Group;
  fail(Errc::Invalid, "grantee_type must be user or group");
}

std::string_view to_string(ReservationState s) noexcept {
  switch (s) {
    case ReservationState::Pending: return "pending";
    case ReservationState::Committed: return "committed";
    case ReservationState::Released: return "released";
  }
  return "pending";
}

namespace records {

namespace {

constexpr const char* kUserCols =
    "user_id, username, kdf_id, salt, iterations, digest, role, status, quota_bytes, created_at";

User user_row(const meta::Statement& st) {
  User u;
  u.user_id = UserId(st.text(0));
  u.username = st.text(1);
  u.password.kdf_id = st.text(2);
  u.password.salt = st.blob(3);
  u.password.iterations = static_cast<std::uint32_t>(st.integer(4));
  u.password.digest = st.blob(5);
  u.role = parse_role(st.text(6));
  u.status = parse_user_status(st.text(7));
  u.quota_bytes = static_cast<std::uint64_t>(st.integer(8));
  u.created_at = from_millis(st.integer(9));
  return u;
}

constexpr const char* kNodeCols = "node_id, kind, name, parent_id, owner_id, created_at, modified_at";

Node node_row(const meta::Statement& st) {
  Node n;
  n.node_id = NodeId(st.text(0));
  n.kind = st.text(1) == "file" ? NodeKind::File : NodeKind::Folder;
  n.name = st.text(2);
  if (!st.is_null(3)) n.parent_id = NodeId(st.text(3));
  n.owner_id = UserId(st.text(4));
  n.created_at = from_millis(st.integer(5));
  n.modified_at = from_millis(st.integer(6));
  return n;
}

constexpr const char* kVersionCols =
    "file_id, version_number, blob_hash, size_bytes, author_id, comment, created_at";

FileVersion version_row(const meta::Statement& st) {
  FileVersion v;
  v.file_id = NodeId(st.text(0));
  v.version_number = st.integer(1);
  v.blob_hash = BlobHash(st.text(2));
  v.size_bytes = static_cast<std::uint64_t>(st.integer(3));
  v.author_id = UserId(st.text(4));
  v.comment = st.text(5);
  v.created_at = from_millis(st.integer(6));
  return v;
}

constexpr const char* kShareCols =
    "share_id, node_id, grantee_kind, grantee_id, can_read, can_write, granted_by, created_at";

Share share_row(const meta::Statement& st) {
  Share s;
  s.share_id = ShareId(st.text(0));
  s.node_id = NodeId(st.text(1));
  s.grantee.kind = parse_grantee_kind(st.text(2));
  s.grantee.id = st.text(3);
  s.rights = Rights::normalized(st.integer(4) != 0, st.integer(5) != 0);
  s.granted_by = UserId(st.text(6));
  s.created_at = from_millis(st.integer(7));
  return s;
}

std::string sql(const char* head, const char* cols, const char* tail) {
  return std::string(head) + cols + tail;
}

}  // namespace

std::optional<User> find_user(const meta::Txn& t, const UserId& id) {
  auto st = t.query(sql("SELECT ", kUserCols, " FROM users WHERE user_id = ?"), id);
  if (!st.step()) return std::nullopt;
  return user_row(st);
}

std::optional<User> find_user_by_name(const meta::Txn& t, std::string_view username) {
  auto st = t.query(sql("SELECT ", kUserCols, " FROM users WHERE username = ? COLLATE NOCASE"),
                    username);
  if (!st.step()) return std::nullopt;
  return user_row(st);
}

User load_user(const meta::Txn& t, const UserId& id) {
  auto u = find_user(t, id);
  if (!u) fail(Errc::NotFound, "user not found");
  return *u;
}

std::vector<User> all_users(const meta::Txn& t) {
  auto st = t.query(sql("SELECT ", kUserCols, " FROM users ORDER BY username"));
  std::vector<User> out;
  while (st.step()) out.push_back(user_row(st));
  return out;
}

bool is_admin(const meta::Txn& t, const UserId& id) {
  if (id == system_actor()) return true;
  auto st = t.query("SELECT role FROM users WHERE user_id = ?", id);
  return st.step() && st.text(0) == "admin";
}

std::vector<GroupId> groups_of(const meta::Txn& t, const UserId& id) {
  auto st = t.query("SELECT group_id FROM group_members WHERE user_id = ?", id);
  std::vector<GroupId> out;
  while (st.step()) out.emplace_back(st.text(0));
  return out;
}

std::optional<Node> find_node(const meta::Txn& t, const NodeId& id) {
  auto st = t.query(sql("SELECT ", kNodeCols, " FROM nodes WHERE node_id = ?"), id);
  if (!st.step()) return std::nullopt;
  return node_row(st);
}

Node load_node(const meta::Txn& t, const NodeId& id) {
  auto n = find_node(t, id);
  if (!n) fail(Errc::NotFound, "node not found");
  return *n;
}

std::optional<Node> find_child(const meta::Txn& t, const NodeId& parent, std::string_view name) {
  auto st = t.query(sql("SELECT ", kNodeCols, " FROM nodes WHERE parent_id = ? AND name = ?"),
                    parent, name);
  if (!st.step()) return std::nullopt;
  return node_row(st);
}

std::vector<Node> children(const meta::Txn& t, const NodeId& parent) {
  auto st = t.query(sql("SELECT ", kNodeCols, " FROM nodes WHERE parent_id = ?"), parent);
  std::vector<Node> out;
  while (st.step()) out.push_back(node_row(st));
  return out;
}

std::optional<Node> root_of(const meta::Txn& t, const UserId& owner) {
  auto st = t.query(sql("SELECT ", kNodeCols, " FROM nodes WHERE owner_id = ? AND parent_id IS NULL"),
                    owner);
  if (!st.step()) return std::nullopt;
  return node_row(st);
}

std::vector<Node> nodes_of(const meta::Txn& t, const UserId& owner) {
  auto st = t.query(sql("SELECT ", kNodeCols, " FROM nodes WHERE owner_id = ?"), owner);
  std::vector<Node> out;
  while (st.step()) out.push_back(node_row(st));
  return out;
}

void insert_node(const meta::Txn& t, const Node& n) {
  t.exec(
      "INSERT INTO nodes(node_id, kind, name, parent_id, owner_id, created_at, modified_at) "
      "VALUES(?, ?, ?, ?, ?, ?, ?)",
      n.node_id, to_string(n.kind), n.name, n.parent_id, n.owner_id, to_millis(n.created_at),
      to_millis(n.modified_at));
}

std::vector<Node> chain(const meta::Txn& t, const NodeId& id) {
  std::vector<Node> out;
  std::optional<NodeId> cur = id;
  while (cur) {
    auto n = find_node(t, *cur);
    if (!n) {
      if (out.empty()) fail(Errc::NotFound, "node not found");
      fail(Errc::Corrupt, "dangling parent reference");
    }
    cur = n->parent_id;
    out.push_back(std::move(*n));
    if (out.size() > 100000) fail(Errc::Corrupt, "parent chain does not terminate");
  }
  return out;
}

std::vector<FileVersion> versions(const meta::Txn& t, const NodeId& file) {
  auto st = t.query(sql("SELECT ", kVersionCols,
                        " FROM versions WHERE file_id = ? ORDER BY version_number DESC"),
                    file);
  std::vector<FileVersion> out;
  while (st.step()) out.push_back(version_row(st));
  return out;
}

std::optional<FileVersion> find_version(const meta::Txn& t, const NodeId& file, std::int64_t number) {
  auto st = t.query(sql("SELECT ", kVersionCols, " FROM versions WHERE file_id = ? AND version_number = ?"),
                    file, number);
  if (!st.step()) return std::nullopt;
  return version_row(st);
}

std::optional<FileVersion> head_version(const meta::Txn& t, const NodeId& file) {
  auto st = t.query(sql("SELECT ", kVersionCols,
                        " FROM versions WHERE file_id = ? ORDER BY version_number DESC LIMIT 1"),
                    file);
  if (!st.step()) return std::nullopt;
  return version_row(st);
}

std::vector<Share> shares_on(const meta::Txn& t, const NodeId& node) {
  auto st = t.query(sql("SELECT ", kShareCols, " FROM shares WHERE node_id = ?"), node);
  std::vector<Share> out;
  while (st.step()) out.push_back(share_row(st));
  return out;
}

std::optional<Share> find_share(const meta::Txn& t, const ShareId& id) {
  auto st = t.query(sql("SELECT ", kShareCols, " FROM shares WHERE share_id = ?"), id);
  if (!st.step()) return std::nullopt;
  return share_row(st);
}

}  // namespace records
}  // namespace pirus
