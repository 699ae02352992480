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

#include "pirus/catalog.hpp"

#include "pirus/error.hpp"
#include "pirus/records.hpp"
#include "pirus/text.hpp"

#include <algorithm>

namespace pirus {

namespace {

constexpr std::size_t kMaxCommentChars = 1024;

void check_comment(const std::string& comment) {
  if (!text::is_valid_utf8(comment)) fail(Errc::Invalid, "comment is not valid UTF-8");
  if (text::utf8_length(comment) > kMaxCommentChars) fail(Errc::Invalid, "comment exceeds 1024 characters");
}

}  // namespace

bool Catalog::valid_name(std::string_view name) noexcept {
  if (name.empty() || name.size() > 255) return false;
  if (name == "." || name == "..") return false;
  if (name.find('/') != std::string_view::npos || name.find('\0') != std::string_view::npos) return false;
  return text::is_valid_utf8(name);
}

void Catalog::sort_children(std::vector<Node>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) {
    const bool fa = a.kind == NodeKind::Folder;
    const bool fb = b.kind == NodeKind::Folder;
    if (fa != fb) return fa;
    return a.name < b.name;
  });
}

void Catalog::touch(const meta::Txn& t, const NodeId& node, Timestamp now) const {
  t.exec("UPDATE nodes SET modified_at = ? WHERE node_id = ?", to_millis(now), node);
}

Node Catalog::create_root(const meta::Txn& t, const UserId& owner, const std::string& name) {
  if (records::root_of(t, owner)) fail(Errc::Conflict, "user already has a root folder");
  Node n;
  n.node_id = new_id<NodeId>();
  n.kind = NodeKind::Folder;
  n.name = name;
  n.owner_id = owner;
  n.created_at = n.modified_at = clock_();
  records::insert_node(t, n);
  return n;
}

Node Catalog::check_new_child(const meta::Txn& t, const UserId& actor, const NodeId& parent,
                              const std::string& name) const {
  auto p = access_.require(t, actor, parent, Access::Write);
  if (p.kind != NodeKind::Folder) fail(Errc::Invalid, "parent is not a folder");
  if (!valid_name(name)) fail(Errc::Invalid, "invalid name");
  if (records::find_child(t, parent, name)) fail(Errc::Conflict, "name already exists in folder");
  return p;
}

Node Catalog::create_folder(const UserId& actor, const NodeId& parent, const std::string& name) {
  return meta_.write([&](meta::Txn& t) {
    const auto p = check_new_child(t, actor, parent, name);
    Node n;
    n.node_id = new_id<NodeId>();
    n.kind = NodeKind::Folder;
    n.name = name;
    n.parent_id = p.node_id;
    n.owner_id = p.owner_id;
    n.created_at = n.modified_at = clock_();
    records::insert_node(t, n);
    touch(t, p.node_id, n.created_at);
    return n;
  });
}

FileVersion Catalog::append(const meta::Txn& t, const Node& file, const UserId& author,
                            const BlobHash& hash, std::uint64_t size, const std::string& comment) {
  check_comment(comment);
  auto st = t.query("SELECT COALESCE(MAX(version_number), 0) FROM versions WHERE file_id = ?", file.node_id);
  st.step();
  FileVersion v;
  v.file_id = file.node_id;
  v.version_number = st.integer(0) + 1;
  v.blob_hash = hash;
  v.size_bytes = size;
  v.author_id = author;
  v.comment = comment;
  v.created_at = clock_();
  t.exec("INSERT INTO versions(file_id, version_number, blob_hash, size_bytes, author_id, comment, "
         "created_at) VALUES(?, ?, ?, ?, ?, ?, ?)",
         v.file_id, v.version_number, v.blob_hash, v.size_bytes, v.author_id, v.comment,
         to_millis(v.created_at));
  touch(t, file.node_id, v.created_at);
  return v;
}

std::pair<Node, FileVersion> Catalog::create_file(const meta::Txn& t, const UserId& actor,
                                                  const NodeId& parent, const std::string& name,
                                                  const BlobHash& hash, std::uint64_t size,
                                                  const std::string& comment) {
  const auto p = check_new_child(t, actor, parent, name);
  check_comment(comment);
  Node n;
  n.node_id = new_id<NodeId>();
  n.kind = NodeKind::File;
  n.name = name;
  n.parent_id = p.node_id;
  n.owner_id = p.owner_id;
  n.created_at = n.modified_at = clock_();
  records::insert_node(t, n);
  touch(t, p.node_id, n.created_at);
  auto v = append(t, n, actor, hash, size, comment);
  n.modified_at = v.created_at;
  return {n, v};
}

FileVersion Catalog::add_version(const meta::Txn& t, const UserId& actor, const NodeId& file,
                                 const BlobHash& hash, std::uint64_t size, const std::string& comment) {
  const auto n = access_.require(t, actor, file, Access::Write);
  if (!n.is_file()) fail(Errc::Invalid, "node is a folder");
  return append(t, n, actor, hash, size, comment);
}

FileVersion Catalog::restore_version(const UserId& actor, const NodeId& file, std::int64_t version) {
  return meta_.write([&](meta::Txn& t) {
    const auto n = access_.require(t, actor, file, Access::Write);
    if (!n.is_file()) fail(Errc::Invalid, "node is a folder");
    const auto target = records::find_version(t, file, version);
    if (!target) fail(Errc::NotFound, "version not found");
    quota_.charge(t, n.owner_id, target->size_bytes);
    blobs_.incref(t, target->blob_hash);
    return append(t, n, actor, target->blob_hash, target->size_bytes,
                  "restore of version " + std::to_string(version));
  });
}

std::vector<FileVersion> Catalog::get_versions(const UserId& actor, const NodeId& file) const {
  return meta_.read([&](meta::Txn& t) {
    const auto n = access_.require(t, actor, file, Access::Read);
    if (!n.is_file()) fail(Errc::Invalid, "node is a folder");
    return records::versions(t, file);
  });
}

FileVersion Catalog::get_version(const UserId& actor, const NodeId& file,
                                 std::optional<std::int64_t> number) const {
  return meta_.read([&](meta::Txn& t) {
    const auto n = access_.require(t, actor, file, Access::Read);
    if (!n.is_file()) fail(Errc::Invalid, "node is a folder");
    auto v = number ? records::find_version(t, file, *number) : records::head_version(t, file);
    if (!v) fail(Errc::NotFound, "version not found");
    return *v;
  });
}

Node Catalog::get_node(const UserId& actor, const NodeId& node) const {
  return meta_.read([&](meta::Txn& t) { return access_.require(t, actor, node, Access::Read); });
}

std::vector<Node> Catalog::list_children(const UserId& actor, const NodeId& folder) const {
  return meta_.read([&](meta::Txn& t) {
    const auto n = access_.require(t, actor, folder, Access::Read);
    if (n.kind != NodeKind::Folder) fail(Errc::Invalid, "node is not a folder");
    auto out = records::children(t, folder);
    sort_children(out);
    return out;
  });
}

Node Catalog::update_node(const UserId& actor, const NodeId& node, const NodePatch& patch) {
  return meta_.write([&](meta::Txn& t) {
    auto n = access_.require(t, actor, node, Access::Write);
    if (!patch.name && !patch.new_parent_id) return n;
    if (n.is_root()) fail(Errc::Invalid, "the root folder cannot be renamed or moved");

    const auto new_name = patch.name.value_or(n.name);
    if (!valid_name(new_name)) fail(Errc::Invalid, "invalid name");
    const auto old_parent = *n.parent_id;
    auto new_parent = old_parent;

    if (patch.new_parent_id && *patch.new_parent_id != old_parent) {
      const auto dest_chain = records::chain(t, *patch.new_parent_id);
      const auto& dest = dest_chain.front();
      if (access_.effective_rights(t, actor, dest_chain) < Access::Write)
        fail(Errc::Forbidden, "no write access to destination");
      if (dest.kind != NodeKind::Folder) fail(Errc::Invalid, "destination is not a folder");
      if (dest.owner_id != n.owner_id) fail(Errc::Invalid, "cannot move across owners");
      const bool cycle = std::any_of(dest_chain.begin(), dest_chain.end(),
                                     [&](const Node& a) { return a.node_id == n.node_id; });
      if (cycle) fail(Errc::Cycle, "cannot move a folder into itself or a descendant");
      new_parent = dest.node_id;
    }

    if (new_parent == old_parent && new_name == n.name) return n;
    if (auto clash = records::find_child(t, new_parent, new_name); clash && clash->node_id != n.node_id)
      fail(Errc::Conflict, "name already exists in folder");

    const auto now = clock_();
    t.exec("UPDATE nodes SET name = ?, parent_id = ?, modified_at = ? WHERE node_id = ?", new_name,
           new_parent, to_millis(now), n.node_id);
    touch(t, old_parent, now);
    if (new_parent != old_parent) touch(t, new_parent, now);
    n.name = new_name;
    n.parent_id = new_parent;
    n.modified_at = now;
    return n;
  });
}

DeletionReport Catalog::remove_subtree(const meta::Txn& t, const Node& top) {
  DeletionReport report;
  std::vector<Node> stack{top};
  std::vector<NodeId> doomed;
  while (!stack.empty()) {
    auto n = std::move(stack.back());
    stack.pop_back();
    if (n.is_file()) {
      for (const auto& v : records::versions(t, n.node_id)) {
        blobs_.decref(t, v.blob_hash);
        report.bytes_freed += v.size_bytes;
      }
      t.exec("DELETE FROM versions WHERE file_id = ?", n.node_id);
    } else {
      for (auto& c : records::children(t, n.node_id)) stack.push_back(std::move(c));
    }
    doomed.push_back(n.node_id);
  }
  for (const auto& id : doomed) t.exec("DELETE FROM nodes WHERE node_id = ?", id);
  report.nodes_removed = doomed.size();
  quota_.credit(t, top.owner_id, report.bytes_freed);
  return report;
}

DeletionReport Catalog::delete_node(const UserId& actor, const NodeId& node) {
  return meta_.write([&](meta::Txn& t) {
    const auto n = access_.require(t, actor, node, Access::Write);
    if (n.is_root()) fail(Errc::Invalid, "the root folder cannot be deleted");
    auto report = remove_subtree(t, n);
    touch(t, *n.parent_id, clock_());
    return report;
  });
}

Node Catalog::resolve_path(const UserId& actor, const NodeId& root, std::string_view path) const {
  std::vector<std::string_view> segments;
  if (!path.empty()) {
    std::size_t start = 0;
    for (;;) {
      const auto slash = path.find('/', start);
      const auto seg = path.substr(start, slash == std::string_view::npos ? path.npos : slash - start);
      if (seg.empty() || seg == "." || seg == "..") fail(Errc::Invalid, "malformed path");
      segments.push_back(seg);
      if (slash == std::string_view::npos) break;
      start = slash + 1;
    }
  }
  return meta_.read([&](meta::Txn& t) {
    auto cur = access_.require(t, actor, root, Access::Read);
    for (const auto seg : segments) {
      if (cur.kind != NodeKind::Folder) fail(Errc::NotFound, "path traverses a file");
      auto next = records::find_child(t, cur.node_id, seg);
      if (!next) fail(Errc::NotFound, "path not found");
      cur = access_.require(t, actor, next->node_id, Access::Read);
    }
    return cur;
  });
}

}  // namespace pirus
