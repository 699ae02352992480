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
#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"

#include <string>
#include <vector>

namespace pirus {

/// Named link collections ("root-objects") over files and folders.
///
/// Leaves are node ids only; a link can never be a leaf, so link graphs
/// have depth one. Deleted leaves are pruned lazily on resolve; leaves the
/// owner can no longer read are hidden but kept.
class Links {
 public:
  Links(meta::MetaStore& meta, AccessControl& access, Clock clock)
      : meta_(meta), access_(access), clock_(std::move(clock)) {}

  RootObject create_link(const UserId& actor, const std::string& name, const std::vector<NodeId>& leaves);
  std::vector<LeafDescriptor> resolve(const UserId& actor, const LinkId& link);
  RootObject update_link(const UserId& actor, const LinkId& link, const std::vector<NodeId>& add,
                         const std::vector<NodeId>& remove);
  void delete_link(const UserId& actor, const LinkId& link);

  RootObject get_link(const UserId& actor, const LinkId& link) const;
  std::vector<RootObject> list_links(const UserId& owner) const;

  void drop_owner(const meta::Txn& t, const UserId& owner) const;

 private:
  RootObject load(const meta::Txn& t, const LinkId& link) const;
  RootObject load_for(const meta::Txn& t, const UserId& actor, const LinkId& link) const;
  void check_leaf(const meta::Txn& t, const UserId& actor, const NodeId& leaf) const;

  meta::MetaStore& meta_;
  AccessControl& access_;
  Clock clock_;
};

}  // namespace pirus
