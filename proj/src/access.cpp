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

#include "pirus/access.hpp"

#include "pirus/error.hpp"
#include "pirus/records.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace pirus {

namespace {

bool grantee_exists(const meta::Txn& t, const Grantee& g) {
  if (g.kind == GranteeKind::User) return records::find_user(t, UserId(g.id)).has_value();
  auto st = t.query("SELECT 1 FROM groups WHERE group_id = ?", g.id);
  return st.step();
}

}  // namespace

Access AccessControl::effective_rights(const UserId& user, const NodeId& node) const {
  return meta_.read([&](meta::Txn& t) { return effective_rights(t, user, node); });
}

Access AccessControl::effective_rights(const meta::Txn& t, const UserId& user,
                                       const NodeId& node) const {
  return effective_rights(t, user, records::chain(t, node));
}

Access AccessControl::effective_rights(const meta::Txn& t, const UserId& user,
                                       const std::vector<Node>& chain) const {
  if (chain.empty()) fail(Errc::NotFound, "node not found");
  if (chain.front().owner_id == user) return Access::Owner;
  if (records::is_admin(t, user)) return Access::Owner;

  std::unordered_set<std::string> groups;
  for (const auto& g : records::groups_of(t, user)) groups.insert(g.str());

  Rights acc;
  for (const auto& n : chain) {
    auto q = t.query(
        "SELECT grantee_kind, grantee_id, can_read, can_write FROM shares WHERE node_id = ?",
        n.node_id);
    while (q.step()) {
      const auto kind = q.text(0);
      const auto id = q.text(1);
      const bool applies = (kind == "user" && id == user.str()) || (kind == "group" && groups.count(id));
      if (applies) acc = acc | Rights::normalized(q.integer(2) != 0, q.integer(3) != 0);
    }
    if (acc.write) break;
  }
  return access_from(acc);
}

Node AccessControl::require(const meta::Txn& t, const UserId& actor, const NodeId& node,
                            Access needed) const {
  auto c = records::chain(t, node);
  if (effective_rights(t, actor, c) < needed) fail(Errc::Forbidden, "insufficient rights");
  return std::move(c.front());
}

Share AccessControl::grant(const UserId& actor, const NodeId& node, const Grantee& grantee,
                           Rights rights) {
  rights = Rights::normalized(rights.read, rights.write);
  return meta_.write([&](meta::Txn& t) {
    const auto c = records::chain(t, node);
    const auto& target = c.front();
    bool allowed = target.owner_id == actor || records::is_admin(t, actor);
    if (!allowed) {
      auto u = records::find_user(t, actor);
      allowed = u && u->role == Role::Supervisor && effective_rights(t, actor, c) >= Access::Write;
    }
    if (!allowed) fail(Errc::Forbidden, "not allowed to share this node");
    if (!grantee_exists(t, grantee)) fail(Errc::NotFound, "grantee not found");
    if (grantee.kind == GranteeKind::User && grantee.id == target.owner_id.str())
      fail(Errc::Invalid, "owner cannot be a grantee of their own node");
    if (!rights.read) fail(Errc::Invalid, "a share must grant read or write");

    Share s;
    s.node_id = target.node_id;
    s.grantee = grantee;
    s.rights = rights;
    s.granted_by = actor;
    s.created_at = clock_();
    auto existing = t.query(
        "SELECT share_id FROM shares WHERE node_id = ? AND grantee_kind = ? AND grantee_id = ?",
        s.node_id, to_string(grantee.kind), grantee.id);
    if (existing.step()) {
      s.share_id = ShareId(existing.text(0));
      t.exec("UPDATE shares SET can_read = ?, can_write = ?, granted_by = ?, created_at = ? "
             "WHERE share_id = ?",
             rights.read, rights.write, actor, to_millis(s.created_at), s.share_id);
    } else {
      s.share_id = new_id<ShareId>();
      t.exec("INSERT INTO shares(share_id, node_id, grantee_kind, grantee_id, can_read, "
             "can_write, granted_by, created_at) VALUES(?, ?, ?, ?, ?, ?, ?, ?)",
             s.share_id, s.node_id, to_string(grantee.kind), grantee.id, rights.read,
             rights.write, actor, to_millis(s.created_at));
    }
    return s;
  });
}

void AccessControl::revoke(const UserId& actor, const ShareId& share) {
  meta_.write([&](meta::Txn& t) {
    const auto s = records::find_share(t, share);
    if (!s) fail(Errc::NotFound, "share not found");
    bool allowed = s->granted_by == actor || records::is_admin(t, actor);
    if (!allowed) {
      const auto n = records::find_node(t, s->node_id);
      allowed = n && n->owner_id == actor;
    }
    if (!allowed) fail(Errc::Forbidden, "not allowed to revoke this share");
    t.exec("DELETE FROM shares WHERE share_id = ?", share);
  });
}

std::vector<SharedEntry> AccessControl::list_shared_with(const UserId& user) {
  std::vector<ShareId> dangling;
  auto out = meta_.read([&](meta::Txn& t) {
    std::vector<std::pair<std::string, std::string>> applicable;  // share_id, node_id
    auto st = t.query(
        "SELECT share_id, node_id FROM shares WHERE (grantee_kind = 'user' AND grantee_id = ?) "
        "OR (grantee_kind = 'group' AND grantee_id IN "
        "(SELECT group_id FROM group_members WHERE user_id = ?))",
        user, user);
    while (st.step()) applicable.emplace_back(st.text(0), st.text(1));

    std::unordered_map<std::string, std::vector<Node>> chains;
    for (const auto& [share_id, node_id] : applicable) {
      if (chains.count(node_id)) continue;
      auto n = records::find_node(t, NodeId(node_id));
      if (!n) {
        dangling.emplace_back(share_id);
        continue;
      }
      if (n->owner_id == user) continue;
      chains.emplace(node_id, records::chain(t, NodeId(node_id)));
    }

    std::vector<SharedEntry> roots;
    for (const auto& [node_id, c] : chains) {
      const bool shadowed = std::any_of(c.begin() + 1, c.end(), [&](const Node& anc) {
        return chains.count(anc.node_id.str()) != 0;
      });
      if (shadowed) continue;
      roots.push_back({c.front(), effective_rights(t, user, c)});
    }
    std::sort(roots.begin(), roots.end(), [](const SharedEntry& a, const SharedEntry& b) {
      return std::tie(a.node.name, a.node.node_id) < std::tie(b.node.name, b.node.node_id);
    });
    return roots;
  });
  if (!dangling.empty()) {
    meta_.write([&](meta::Txn& t) {
      for (const auto& id : dangling) {
        auto s = records::find_share(t, id);
        if (s && !records::find_node(t, s->node_id)) t.exec("DELETE FROM shares WHERE share_id = ?", id);
      }
    });
  }
  return out;
}

std::vector<Share> AccessControl::shares_of(const UserId& actor, const NodeId& node) const {
  return meta_.read([&](meta::Txn& t) {
    require(t, actor, node, Access::Write);
    auto out = records::shares_on(t, node);
    std::sort(out.begin(), out.end(), [](const Share& a, const Share& b) {
      return std::tie(a.created_at, a.share_id) < std::tie(b.created_at, b.share_id);
    });
    return out;
  });
}

void AccessControl::drop_grantee(const meta::Txn& t, const Grantee& grantee) const {
  t.exec("DELETE FROM shares WHERE grantee_kind = ? AND grantee_id = ?", to_string(grantee.kind),
         grantee.id);
}

}  // namespace pirus
