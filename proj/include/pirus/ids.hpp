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

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace pirus {

/// A UUIDv4 identifier tagged with the entity it names, so that a NodeId
/// cannot be passed where a UserId is expected.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }

 private:
  std::string value_;
};

using UserId = Id<struct UserTag>;
using GroupId = Id<struct GroupTag>;
using NodeId = Id<struct NodeTag>;
using ShareId = Id<struct ShareTag>;
using LinkId = Id<struct LinkTag>;
using ReservationId = Id<struct ReservationTag>;

/// Random version-4 UUID in canonical lowercase form.
std::string make_uuid4();

/// True for canonical lowercase 8-4-4-4-12 UUID text.
bool is_uuid(std::string_view text) noexcept;

template <class T>
T new_id() {
  return T(make_uuid4());
}

/// Principal used by offline tooling (bootstrap, CLI user commands).
/// Treated as an administrator but never stored as a user.
inline const UserId& system_actor() {
  static const UserId id("00000000-0000-0000-0000-000000000000");
  return id;
}

/// SHA-256 content address: 64 lowercase hex characters.
class BlobHash {
 public:
  BlobHash() = default;
  /// Throws Error(Invalid) unless `hex` is canonical.
  explicit BlobHash(std::string hex);

  static bool is_canonical(std::string_view hex) noexcept;

  const std::string& str() const noexcept { return hex_; }

  friend auto operator<=>(const BlobHash&, const BlobHash&) = default;
  friend bool operator==(const BlobHash&, const BlobHash&) = default;
  friend std::ostream& operator<<(std::ostream& os, const BlobHash& h) { return os << h.hex_; }

 private:
  std::string hex_;
};

}  // namespace pirus

template <class Tag>
struct std::hash<pirus::Id<Tag>> {
  std::size_t operator()(const pirus::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

template <>
struct std::hash<pirus::BlobHash> {
  std::size_t operator()(const pirus::BlobHash& h) const noexcept {
    return std::hash<std::string>{}(h.str());
  }
};
