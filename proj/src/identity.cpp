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

#include "pirus/identity.hpp"

#include "pirus/crypto.hpp"
#include "pirus/error.hpp"
#include "pirus/records.hpp"
#include "pirus/text.hpp"

#include <algorithm>

namespace pirus {

namespace {

constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kTokenBytes = 32;
constexpr const char* kAuthFailed = "invalid username or password";

void check_password(std::string_view password) {
  if (password.size() < kMinPasswordLength) fail(Errc::Invalid, "password must be at least 8 characters");
}

Group load_group(const meta::Txn& t, const GroupId& id, std::string name) {
  Group g;
  g.group_id = id;
  g.name = std::move(name);
  auto st = t.query("SELECT user_id FROM group_members WHERE group_id = ? ORDER BY user_id", id);
  while (st.step()) g.member_ids.emplace_back(st.text(0));
  return g;
}

}  // namespace

PasswordRecord derive_password(std::string_view password, std::uint32_t iterations) {
  PasswordRecord r;
  r.kdf_id = std::string(kKdfId);
  r.salt = crypto::random_bytes(kSaltBytes);
  r.iterations = iterations;
  const auto d = crypto::pbkdf2_sha256(password, r.salt, iterations);
  r.digest.assign(d.begin(), d.end());
  return r;
}

bool verify_password(const PasswordRecord& record, std::string_view password) {
  if (record.kdf_id != kKdfId || record.iterations == 0) return false;
  const auto d = crypto::pbkdf2_sha256(password, record.salt, record.iterations);
  return crypto::constant_time_equal(d, record.digest);
}

std::string make_session_token() { return crypto::base64url_encode(crypto::random_bytes(kTokenBytes)); }

bool Identity::valid_username(std::string_view name) noexcept {
  if (name.size() < 3 || name.size() > 32) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
  });
}

void Identity::require_admin(const meta::Txn& t, const UserId& actor) const {
  if (!records::is_admin(t, actor)) fail(Errc::Forbidden, "administrator role required");
}

User Identity::create_user(const UserId& actor, std::string_view username, std::string_view password,
                           Role role, std::uint64_t quota_bytes) {
  const auto name = text::to_lower_ascii(username);
  {
    // Authorization before validation, so non-admins learn nothing.
    meta_.read([&](meta::Txn& t) { require_admin(t, actor); });
  }
  if (!valid_username(name)) fail(Errc::Invalid, "username must be 3-32 chars of a-z 0-9 . _ -");
  check_password(password);
  // KDF outside the write lock.
  auto record = derive_password(password, options_.password_iterations);
  return meta_.write([&](meta::Txn& t) {
    require_admin(t, actor);
    if (records::find_user_by_name(t, name)) fail(Errc::Conflict, "username already taken");
    User u;
    u.user_id = new_id<UserId>();
    u.username = name;
    u.password = std::move(record);
    u.role = role;
    u.status = UserStatus::Active;
    u.quota_bytes = quota_bytes;
    u.created_at = clock_();
    t.exec("INSERT INTO users(user_id, username, kdf_id, salt, iterations, digest, role, status, "
           "quota_bytes, created_at) VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
           u.user_id, u.username, u.password.kdf_id, u.password.salt, u.password.iterations,
           u.password.digest, to_string(u.role), to_string(u.status), u.quota_bytes,
           to_millis(u.created_at));
    t.exec("INSERT INTO usage(user_id, used_bytes) VALUES(?, 0)", u.user_id);
    catalog_.create_root(t, u.user_id, u.username);
    return u;
  });
}

Session Identity::authenticate(std::string_view username, std::string_view password) {
  const auto name = text::to_lower_ascii(username);
  const auto user = meta_.read([&](meta::Txn& t) { return records::find_user_by_name(t, name); });
  if (!user) {
    // Equalize timing with the known-user path.
    static const PasswordRecord dummy = derive_password("pirus-dummy-password", 1);
    auto probe = dummy;
    probe.iterations = options_.password_iterations;
    verify_password(probe, password);
    fail(Errc::AuthFailed, kAuthFailed);
  }
  if (!verify_password(user->password, password)) fail(Errc::AuthFailed, kAuthFailed);
  if (user->status != UserStatus::Active) fail(Errc::Forbidden, "account disabled");

  Session s;
  s.token = make_session_token();
  s.user_id = user->user_id;
  const auto now = clock_();
  s.expires_at = now + std::chrono::duration_cast<std::chrono::milliseconds>(options_.session_ttl);
  meta_.write([&](meta::Txn& t) {
    // Status may have changed since the read above.
    const auto fresh = records::find_user(t, user->user_id);
    if (!fresh) fail(Errc::AuthFailed, kAuthFailed);
    if (fresh->status != UserStatus::Active) fail(Errc::Forbidden, "account disabled");
    t.exec("DELETE FROM sessions WHERE expires_at <= ?", to_millis(now));
    t.exec("INSERT INTO sessions(token, user_id, expires_at) VALUES(?, ?, ?)", s.token, s.user_id,
           to_millis(s.expires_at));
  });
  return s;
}

UserId Identity::validate_session(std::string_view token) const {
  return meta_.read([&](meta::Txn& t) {
    auto st = t.query(
        "SELECT s.user_id, s.expires_at, u.status FROM sessions s JOIN users u ON u.user_id = s.user_id "
        "WHERE s.token = ?",
        token);
    if (!st.step()) fail(Errc::AuthRequired, "authentication required");
    if (st.integer(1) <= to_millis(clock_()) || st.text(2) != "active")
      fail(Errc::AuthRequired, "authentication required");
    return UserId(st.text(0));
  });
}

void Identity::revoke_session(std::string_view token) {
  meta_.write([&](meta::Txn& t) { t.exec("DELETE FROM sessions WHERE token = ?", token); });
}

User Identity::update_user(const UserId& actor, const UserId& user, const UserPatch& patch) {
  if (patch.password) check_password(*patch.password);
  std::optional<PasswordRecord> record;
  if (patch.password) record = derive_password(*patch.password, options_.password_iterations);
  return meta_.write([&](meta::Txn& t) {
    require_admin(t, actor);
    auto u = records::load_user(t, user);
    if (patch.role) u.role = *patch.role;
    if (patch.quota_bytes) u.quota_bytes = *patch.quota_bytes;
    if (patch.status) u.status = *patch.status;
    t.exec("UPDATE users SET role = ?, quota_bytes = ?, status = ? WHERE user_id = ?", to_string(u.role),
           u.quota_bytes, to_string(u.status), user);
    if (record) {
      u.password = *record;
      t.exec("UPDATE users SET kdf_id = ?, salt = ?, iterations = ?, digest = ? WHERE user_id = ?",
             u.password.kdf_id, u.password.salt, u.password.iterations, u.password.digest, user);
    }
    if (u.status == UserStatus::Disabled) t.exec("DELETE FROM sessions WHERE user_id = ?", user);
    return u;
  });
}

void Identity::delete_user(const UserId& actor, const UserId& user, bool force) {
  meta_.write([&](meta::Txn& t) {
    require_admin(t, actor);
    if (actor == user) fail(Errc::Forbidden, "cannot delete yourself");
    const auto u = records::load_user(t, user);
    auto count = t.query("SELECT COUNT(*) FROM nodes WHERE owner_id = ?", user);
    count.step();
    if (count.integer(0) > 1 && !force) fail(Errc::Conflict, "user owns content; use force to delete");

    t.exec("DELETE FROM shares WHERE node_id IN (SELECT node_id FROM nodes WHERE owner_id = ?)", user);
    if (auto root = records::root_of(t, user)) catalog_.remove_subtree(t, *root);
    t.exec("DELETE FROM nodes WHERE owner_id = ?", user);
    access_.drop_grantee(t, Grantee::user(user));
    links_.drop_owner(t, user);
    quota_.release_user(t, user);
    t.exec("DELETE FROM group_members WHERE user_id = ?", user);
    t.exec("DELETE FROM sessions WHERE user_id = ?", user);
    t.exec("DELETE FROM usage WHERE user_id = ?", user);
    t.exec("DELETE FROM users WHERE user_id = ?", u.user_id);
  });
}

Group Identity::set_group(const UserId& actor, std::string_view name, const std::vector<UserId>& members) {
  const auto gname = text::to_lower_ascii(name);
  return meta_.write([&](meta::Txn& t) {
    require_admin(t, actor);
    if (!valid_username(gname)) fail(Errc::Invalid, "group name must be 3-32 chars of a-z 0-9 . _ -");
    for (const auto& m : members)
      if (!records::find_user(t, m)) fail(Errc::NotFound, "member not found: " + m.str());
    GroupId id;
    auto st = t.query("SELECT group_id FROM groups WHERE name = ?", gname);
    if (st.step()) {
      id = GroupId(st.text(0));
      t.exec("DELETE FROM group_members WHERE group_id = ?", id);
    } else {
      id = new_id<GroupId>();
      t.exec("INSERT INTO groups(group_id, name) VALUES(?, ?)", id, gname);
    }
    for (const auto& m : members)
      t.exec("INSERT OR IGNORE INTO group_members(group_id, user_id) VALUES(?, ?)", id, m);
    return load_group(t, id, gname);
  });
}

User Identity::get_user(const UserId& user) const {
  return meta_.read([&](meta::Txn& t) { return records::load_user(t, user); });
}

std::optional<User> Identity::find_user_by_name(std::string_view username) const {
  const auto name = text::to_lower_ascii(username);
  return meta_.read([&](meta::Txn& t) { return records::find_user_by_name(t, name); });
}

std::vector<User> Identity::list_users(const UserId& actor) const {
  return meta_.read([&](meta::Txn& t) {
    require_admin(t, actor);
    return records::all_users(t);
  });
}

std::optional<Group> Identity::find_group(std::string_view name) const {
  const auto gname = text::to_lower_ascii(name);
  return meta_.read([&](meta::Txn& t) -> std::optional<Group> {
    auto st = t.query("SELECT group_id, name FROM groups WHERE name = ?", gname);
    if (!st.step()) return std::nullopt;
    return load_group(t, GroupId(st.text(0)), st.text(1));
  });
}

std::vector<Group> Identity::list_groups() const {
  return meta_.read([&](meta::Txn& t) {
    std::vector<std::pair<GroupId, std::string>> rows;
    auto st = t.query("SELECT group_id, name FROM groups ORDER BY name");
    while (st.step()) rows.emplace_back(GroupId(st.text(0)), st.text(1));
    std::vector<Group> out;
    for (auto& [id, name] : rows) out.push_back(load_group(t, id, name));
    return out;
  });
}

bool Identity::any_admin() const {
  return meta_.read([&](meta::Txn& t) {
    auto st = t.query("SELECT 1 FROM users WHERE role = 'admin' AND status = 'active' LIMIT 1");
    return st.step();
  });
}

std::size_t Identity::user_count() const {
  return meta_.read([&](meta::Txn& t) {
    auto st = t.query("SELECT COUNT(*) FROM users");
    st.step();
    return static_cast<std::size_t>(st.integer(0));
  });
}

}  // namespace pirus
