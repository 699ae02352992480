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
#include "pirus/catalog.hpp"
#include "pirus/links.hpp"
#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"
#include "pirus/quota.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pirus {

struct IdentityOptions {
  std::uint32_t password_iterations = 100000;
  std::chrono::seconds session_ttl{86400};
};

struct UserPatch {
  std::optional<Role> role;
  std::optional<std::uint64_t> quota_bytes;
  std::optional<UserStatus> status;
  std::optional<std::string> password;
};

inline constexpr std::string_view kKdfId = "pbkdf2-sha256";
inline constexpr std::size_t kMinPasswordLength = 8;

/// Derives a fresh salted record for `password`.
PasswordRecord derive_password(std::string_view password, std::uint32_t iterations);
/// Constant-time check of `password` against a stored record.
bool verify_password(const PasswordRecord& record, std::string_view password);
/// 32 random bytes, base64url without padding (43 chars).
std::string make_session_token();

/// Users, groups, roles and server-side sessions.
class Identity {
 public:
  Identity(meta::MetaStore& meta, Catalog& catalog, AccessControl& access, Links& links, Quota& quota,
           Clock clock, IdentityOptions options)
      : meta_(meta),
        catalog_(catalog),
        access_(access),
        links_(links),
        quota_(quota),
        clock_(std::move(clock)),
        options_(options) {}

  /// 3..32 chars of [a-z0-9._-]. Callers lowercase input first.
  static bool valid_username(std::string_view name) noexcept;

  User create_user(const UserId& actor, std::string_view username, std::string_view password, Role role,
                   std::uint64_t quota_bytes);
  Session authenticate(std::string_view username, std::string_view password);
  UserId validate_session(std::string_view token) const;
  void revoke_session(std::string_view token);
  User update_user(const UserId& actor, const UserId& user, const UserPatch& patch);
  void delete_user(const UserId& actor, const UserId& user, bool force);
  Group set_group(const UserId& actor, std::string_view name, const std::vector<UserId>& members);

  User get_user(const UserId& user) const;
  std::optional<User> find_user_by_name(std::string_view username) const;
  std::vector<User> list_users(const UserId& actor) const;
  std::optional<Group> find_group(std::string_view name) const;
  std::vector<Group> list_groups() const;
  bool any_admin() const;
  std::size_t user_count() const;

  const IdentityOptions& options() const noexcept { return options_; }

 private:
  void require_admin(const meta::Txn& t, const UserId& actor) const;

  meta::MetaStore& meta_;
  Catalog& catalog_;
  AccessControl& access_;
  Links& links_;
  Quota& quota_;
  Clock clock_;
  IdentityOptions options_;
};

}  // namespace pirus
