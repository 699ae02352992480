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

#include <vector>

namespace pirus {

/// Shares and effective-rights evaluation.
///
/// Evaluation order: the node owner gets Owner; an admin gets Owner;
/// otherwise the union of rights from every share on the node or any
/// ancestor whose grantee is the user or a group containing the user.
class AccessControl {
 public:
  AccessControl(meta::MetaStore& meta, Clock clock) : meta_(meta), clock_(std::move(clock)) {}

  Access effective_rights(const UserId& user, const NodeId& node) const;
  Access effective_rights(const meta::Txn& t, const UserId& user, const NodeId& node) const;
  /// `chain` is the node followed by its ancestors (records::chain).
  Access effective_rights(const meta::Txn& t, const UserId& user, const std::vector<Node>& chain) const;

  /// Throws FORBIDDEN unless the user holds at least `needed` on the node.
  /// Returns the loaded node.
  Node require(const meta::Txn& t, const UserId& actor, const NodeId& node, Access needed) const;

  Share grant(const UserId& actor, const NodeId& node, const Grantee& grantee, Rights rights);
  void revoke(const UserId& actor, const ShareId& share);
  std::vector<SharedEntry> list_shared_with(const UserId& user);

  /// Current grants on one node; visible to anyone with write on it.
  std::vector<Share> shares_of(const UserId& actor, const NodeId& node) const;

  /// Removes every share whose grantee is `grantee`.
  void drop_grantee(const meta::Txn& t, const Grantee& grantee) const;

 private:
  meta::MetaStore& meta_;
  Clock clock_;
};

}  // namespace pirus
