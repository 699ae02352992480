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

// Row mapping shared by the modules. Every function runs inside the
// caller's transaction and performs no authorization.

#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"

#include <optional>
#include <vector>

namespace pirus::records {

std::optional<User> find_user(const meta::Txn& t, const UserId& id);
std::optional<User> find_user_by_name(const meta::Txn& t, std::string_view username);
User load_user(const meta::Txn& t, const UserId& id);  // NOT_FOUND
std::vector<User> all_users(const meta::Txn& t);

/// True for the system principal and for users with role admin.
bool is_admin(const meta::Txn& t, const UserId& id);

std::vector<GroupId> groups_of(const meta::Txn& t, const UserId& id);

std::optional<Node> find_node(const meta::Txn& t, const NodeId& id);
Node load_node(const meta::Txn& t, const NodeId& id);  // NOT_FOUND
std::optional<Node> find_child(const meta::Txn& t, const NodeId& parent, std::string_view name);
std::vector<Node> children(const meta::Txn& t, const NodeId& parent);
std::optional<Node> root_of(const meta::Txn& t, const UserId& owner);
std::vector<Node> nodes_of(const meta::Txn& t, const UserId& owner);
void insert_node(const meta::Txn& t, const Node& n);

/// The node followed by its ancestors up to the root.
std::vector<Node> chain(const meta::Txn& t, const NodeId& id);

std::vector<FileVersion> versions(const meta::Txn& t, const NodeId& file);  // descending
std::optional<FileVersion> find_version(const meta::Txn& t, const NodeId& file, std::int64_t number);
std::optional<FileVersion> head_version(const meta::Txn& t, const NodeId& file);

/// Shares attached directly to `node` (ancestors not included).
std::vector<Share> shares_on(const meta::Txn& t, const NodeId& node);
std::optional<Share> find_share(const meta::Txn& t, const ShareId& id);

}  // namespace pirus::records
