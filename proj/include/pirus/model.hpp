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

#include "pirus/clock.hpp"
#include "pirus/ids.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pirus {

enum class Role { Admin, Supervisor, Member };
enum class UserStatus { Active, Disabled };

std::string_view to_string(Role r) noexcept;
std::string_view to_string(UserStatus s) noexcept;
/// Throws Error(Invalid) on unknown text.
Role parse_role(std::string_view text);
UserStatus parse_user_status(std::string_view text);

struct PasswordRecord {
  std::string kdf_id;
  std::vector<std::uint8_t> salt;
  std::uint32_t iterations = 0;
  std::vector<std::uint8_t> digest;
};

struct User {
  UserId user_id;
  std::string username;
  PasswordRecord password;
  Role role = Role::Member;
  UserStatus status = UserStatus::Active;
  std::uint64_t quota_bytes = 0;
  Timestamp created_at;
};

struct Group {
  GroupId group_id;
  std::string name;
  std::vector<UserId> member_ids;  // sorted
};

struct Session {
  std::string token;
  UserId user_id;
  Timestamp expires_at;
};

enum class NodeKind { File, Folder };
std::string_view to_string(NodeKind k) noexcept;

struct Node {
  NodeId node_id;
  NodeKind kind = NodeKind::Folder;
  std::string name;
  std::optional<NodeId> parent_id;
  UserId owner_id;
  Timestamp created_at;
  Timestamp modified_at;

  bool is_root() const noexcept { return !parent_id.has_value(); }
  bool is_file() const noexcept { return kind == NodeKind::File; }
};

struct FileVersion {
  NodeId file_id;
  std::int64_t version_number = 0;
  BlobHash blob_hash;
  std::uint64_t size_bytes = 0;
  UserId author_id;
  std::string comment;
  Timestamp created_at;

  friend bool operator==(const FileVersion&, const FileVersion&) = default;
};

/// Read/write grant; write implies read.
struct Rights {
  bool read = false;
  bool write = false;

  static Rights normalized(bool read, bool write) { return Rights{read || write, write}; }
  Rights operator|(Rights o) const { return Rights{read || o.read, write || o.write}; }
  friend bool operator==(Rights, Rights) = default;
};

/// Outcome of rights evaluation, totally ordered by privilege.
enum class Access { None = 0, Read = 1, Write = 2, Owner = 3 };
std::string_view to_string(Access a) noexcept;

inline Access access_from(Rights r) {
  return r.write ? Access::Write : r.read ? Access::Read : Access::None;
}
inline bool can_read(Access a) { return a >= Access::Read; }
inline bool can_write(Access a) { return a >= Access::Write; }

enum class GranteeKind { User, Group };
std::string_view to_string(GranteeKind k) noexcept;
GranteeKind parse_grantee_kind(std::string_view text);

struct Grantee {
  GranteeKind kind = GranteeKind::User;
  std::string id;

  static Grantee user(const UserId& u) { return {GranteeKind::User, u.str()}; }
  static Grantee group(const GroupId& g) { return {GranteeKind::Group, g.str()}; }
};

struct Share {
  ShareId share_id;
  NodeId node_id;
  Grantee grantee;
  Rights rights;
  UserId granted_by;
  Timestamp created_at;
};

struct SharedEntry {
  Node node;
  Access rights = Access::None;
};

struct RootObject {
  LinkId link_id;
  UserId owner_id;
  std::string name;
  std::vector<NodeId> leaves;
  Timestamp created_at;
  Timestamp modified_at;
};

struct LeafDescriptor {
  NodeId node_id;
  NodeKind kind = NodeKind::File;
  std::string name;
  Access rights = Access::None;
};

enum class ReservationState { Pending, Committed, Released };
std::string_view to_string(ReservationState s) noexcept;

struct Reservation {
  ReservationId reservation_id;
  UserId user_id;
  std::uint64_t bytes = 0;
  ReservationState state = ReservationState::Pending;
  std::optional<BlobHash> blob_hash;
  Timestamp created_at;
};

struct DeletionReport {
  std::uint64_t nodes_removed = 0;
  std::uint64_t bytes_freed = 0;
};

struct GcReport {
  std::uint64_t blobs_removed = 0;
  std::uint64_t bytes_reclaimed = 0;
  std::uint64_t orphans_removed = 0;
};

}  // namespace pirus
