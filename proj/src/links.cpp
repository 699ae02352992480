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

#include "pirus/links.hpp"

#include "pirus/catalog.hpp"
#include "pirus/error.hpp"
#include "pirus/records.hpp"

#include <algorithm>
#include <unordered_set>

namespace pirus {

RootObject Links::load(const meta::Txn& t, const LinkId& link) const {
  auto st = t.query("SELECT owner_id, name, created_at, modified_at FROM links WHERE link_id = ?", link);
  if (!st.step()) fail(Errc::NotFound, "link not found");
  RootObject r;
  r.link_id = link;
  r.owner_id = UserId(st.text(0));
  r.name = st.text(1);
  r.created_at = from_millis(st.integer(2));
  r.modified_at = from_millis(st.integer(3));
  auto leaves = t.query("SELECT node_id FROM link_leaves WHERE link_id = ? ORDER BY position", link);
  while (leaves.step()) r.leaves.emplace_back(leaves.text(0));
  return r;
}

RootObject Links::load_for(const meta::Txn& t, const UserId& actor, const LinkId& link) const {
  auto r = load(t, link);
  if (r.owner_id != actor && !records::is_admin(t, actor)) fail(Errc::Forbidden, "not your link");
  return r;
}

void Links::check_leaf(const meta::Txn& t, const UserId& actor, const NodeId& leaf) const {
  if (!records::find_node(t, leaf)) {
    auto st = t.query("SELECT 1 FROM links WHERE link_id = ?", leaf.str());
    if (st.step()) fail(Errc::Invalid, "a link cannot be a leaf");
    fail(Errc::NotFound, "leaf node not found");
  }
  if (!can_read(access_.effective_rights(t, actor, leaf))) fail(Errc::Forbidden, "leaf not readable");
}

RootObject Links::create_link(const UserId& actor, const std::string& name,
                              const std::vector<NodeId>& leaves) {
  if (!Catalog::valid_name(name)) fail(Errc::Invalid, "invalid link name");
  return meta_.write([&](meta::Txn& t) {
    std::unordered_set<NodeId> seen;
    for (const auto& leaf : leaves) {
      if (!seen.insert(leaf).second) fail(Errc::Invalid, "duplicate leaf");
      check_leaf(t, actor, leaf);
    }
    auto clash = t.query("SELECT 1 FROM links WHERE owner_id = ? AND name = ?", actor, name);
    if (clash.step()) fail(Errc::Conflict, "link name already used");

    RootObject r;
    r.link_id = new_id<LinkId>();
    r.owner_id = actor;
    r.name = name;
    r.leaves = leaves;
    r.created_at = r.modified_at = clock_();
    t.exec("INSERT INTO links(link_id, owner_id, name, created_at, modified_at) VALUES(?, ?, ?, ?, ?)",
           r.link_id, actor, name, to_millis(r.created_at), to_millis(r.modified_at));
    for (std::size_t i = 0; i < leaves.size(); ++i)
      t.exec("INSERT INTO link_leaves(link_id, position, node_id) VALUES(?, ?, ?)", r.link_id,
             static_cast<std::int64_t>(i), leaves[i]);
    return r;
  });
}

std::vector<LeafDescriptor> Links::resolve(const UserId& actor, const LinkId& link) {
  std::vector<NodeId> gone;
  auto out = meta_.read([&](meta::Txn& t) {
    const auto r = load_for(t, actor, link);
    std::vector<LeafDescriptor> leaves;
    for (const auto& id : r.leaves) {
      auto n = records::find_node(t, id);
      if (!n) {
        gone.push_back(id);
        continue;
      }
      const auto rights = access_.effective_rights(t, actor, id);
      if (!can_read(rights)) continue;
      leaves.push_back({n->node_id, n->kind, n->name, rights});
    }
    return leaves;
  });
  if (!gone.empty()) {
    // Follow-up transaction; tolerates the link or nodes changing meanwhile.
    meta_.write([&](meta::Txn& t) {
      for (const auto& id : gone)
        if (!records::find_node(t, id))
          t.exec("DELETE FROM link_leaves WHERE link_id = ? AND node_id = ?", link, id);
    });
  }
  return out;
}

RootObject Links::update_link(const UserId& actor, const LinkId& link, const std::vector<NodeId>& add,
                              const std::vector<NodeId>& remove) {
  return meta_.write([&](meta::Txn& t) {
    auto r = load_for(t, actor, link);
    const std::unordered_set<NodeId> removing(remove.begin(), remove.end());
    std::vector<NodeId> next;
    for (const auto& id : r.leaves)
      if (!removing.count(id)) next.push_back(id);
    std::unordered_set<NodeId> present(next.begin(), next.end());
    for (const auto& id : add) {
      if (!present.insert(id).second) fail(Errc::Invalid, "leaf already present");
      check_leaf(t, actor, id);
      next.push_back(id);
    }
    t.exec("DELETE FROM link_leaves WHERE link_id = ?", link);
    for (std::size_t i = 0; i < next.size(); ++i)
      t.exec("INSERT INTO link_leaves(link_id, position, node_id) VALUES(?, ?, ?)", link,
             static_cast<std::int64_t>(i), next[i]);
    r.leaves = std::move(next);
    r.modified_at = clock_();
    t.exec("UPDATE links SET modified_at = ? WHERE link_id = ?", to_millis(r.modified_at), link);
    return r;
  });
}

void Links::delete_link(const UserId& actor, const LinkId& link) {
  meta_.write([&](meta::Txn& t) {
    load_for(t, actor, link);
    t.exec("DELETE FROM link_leaves WHERE link_id = ?", link);
    t.exec("DELETE FROM links WHERE link_id = ?", link);
  });
}

RootObject Links::get_link(const UserId& actor, const LinkId& link) const {
  return meta_.read([&](meta::Txn& t) { return load_for(t, actor, link); });
}

std::vector<RootObject> Links::list_links(const UserId& owner) const {
  return meta_.read([&](meta::Txn& t) {
    std::vector<LinkId> ids;
    auto st = t.query("SELECT link_id FROM links WHERE owner_id = ? ORDER BY name", owner);
    while (st.step()) ids.emplace_back(st.text(0));
    std::vector<RootObject> out;
    for (const auto& id : ids) out.push_back(load(t, id));
    return out;
  });
}

void Links::drop_owner(const meta::Txn& t, const UserId& owner) const {
  t.exec("DELETE FROM link_leaves WHERE link_id IN (SELECT link_id FROM links WHERE owner_id = ?)", owner);
  t.exec("DELETE FROM links WHERE owner_id = ?", owner);
}

}  // namespace pirus
