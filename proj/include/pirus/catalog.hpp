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
#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"
#include "pirus/quota.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pirus {

struct NodePatch {
  std::optional<std::string> name;
  std::optional<NodeId> new_parent_id;
};

/// Per-user folder/file trees and append-only version chains.
///
/// Invariants: one root folder per user; (parent, name) unique; parent
/// relation acyclic; an owner never changes along a path; version numbers
/// per file are exactly 1..n and rows are never rewritten.
class Catalog {
 public:
  Catalog(meta::MetaStore& meta, AccessControl& access, Quota& quota, BlobStore& blobs, Clock clock)
      : meta_(meta), access_(access), quota_(quota), blobs_(blobs), clock_(std::move(clock)) {}

  /// 1..255 bytes, no '/' or NUL, not "." or "..".
  static bool valid_name(std::string_view name) noexcept;

  Node create_root(const meta::Txn& t, const UserId& owner, const std::string& name);

  Node create_folder(const UserId& actor, const NodeId& parent, const std::string& name);

  /// Caller supplies a referenced blob and has charged the owner's quota.
  std::pair<Node, FileVersion> create_file(const meta::Txn& t, const UserId& actor, const NodeId& parent,
                                           const std::string& name, const BlobHash& hash,
                                           std::uint64_t size, const std::string& comment);
  FileVersion add_version(const meta::Txn& t, const UserId& actor, const NodeId& file,
                          const BlobHash& hash, std::uint64_t size, const std::string& comment);

  /// Copies version k forward as a new head; charges the owner's quota.
  FileVersion restore_version(const UserId& actor, const NodeId& file, std::int64_t version);

  std::vector<FileVersion> get_versions(const UserId& actor, const NodeId& file) const;
  /// Version `number`, or the head when absent. Requires read.
  FileVersion get_version(const UserId& actor, const NodeId& file,
                          std::optional<std::int64_t> number) const;

  Node get_node(const UserId& actor, const NodeId& node) const;
  std::vector<Node> list_children(const UserId& actor, const NodeId& folder) const;
  Node update_node(const UserId& actor, const NodeId& node, const NodePatch& patch);
  DeletionReport delete_node(const UserId& actor, const NodeId& node);
  Node resolve_path(const UserId& actor, const NodeId& root, std::string_view path) const;

  /// Removes a subtree unconditionally: decrefs blobs, credits quota.
  DeletionReport remove_subtree(const meta::Txn& t, const Node& top);

  /// Checks a new child name can be created under `parent` by `actor`;
  /// returns the parent. Used by the upload pipeline before reserving.
  Node check_new_child(const meta::Txn& t, const UserId& actor, const NodeId& parent,
                       const std::string& name) const;

  /// Orders folders first, then by name (bytewise).
  static void sort_children(std::vector<Node>& nodes);

 private:
  void touch(const meta::Txn& t, const NodeId& node, Timestamp now) const;
  FileVersion append(const meta::Txn& t, const Node& file, const UserId& author, const BlobHash& hash,
                     std::uint64_t size, const std::string& comment);

  meta::MetaStore& meta_;
  AccessControl& access_;
  Quota& quota_;
  BlobStore& blobs_;
  Clock clock_;
};

}  // namespace pirus
