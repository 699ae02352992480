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

#include "pirus/blobstore.hpp"
#include "pirus/meta_store.hpp"
#include "pirus/model.hpp"

#include <chrono>
#include <cstdint>
#include <optional>

namespace pirus {

struct RecomputeResult {
  std::uint64_t ledger_bytes = 0;
  std::uint64_t actual_bytes = 0;
  bool repaired() const noexcept { return ledger_bytes != actual_bytes; }
};

/// Per-user storage accounting with reserve/commit/release.
///
/// Headroom is quota_bytes - used_bytes - sum(pending reservations). A
/// reservation may carry one blob reference (taken when the upload's bytes
/// were published); releasing it drops that reference, committing hands it
/// to the new file version.
class Quota {
 public:
  Quota(meta::MetaStore& meta, BlobStore& blobs, Clock clock)
      : meta_(meta), blobs_(blobs), clock_(std::move(clock)) {}

  Reservation reserve(const UserId& user, std::uint64_t bytes);
  Reservation reserve(const meta::Txn& t, const UserId& user, std::uint64_t bytes);

  void commit(const ReservationId& id, std::uint64_t actual_bytes);
  void commit(const meta::Txn& t, const ReservationId& id, std::uint64_t actual_bytes);

  void release(const ReservationId& id);
  void release(const meta::Txn& t, const ReservationId& id);

  /// Records that the reservation holds one reference on `hash`.
  void attach_blob(const meta::Txn& t, const ReservationId& id, const BlobHash& hash);

  std::uint64_t usage(const UserId& user) const;
  std::uint64_t usage(const meta::Txn& t, const UserId& user) const;
  std::uint64_t pending(const meta::Txn& t, const UserId& user) const;

  /// Full scan of the user's versions; repairs the ledger when it differs.
  RecomputeResult recompute(const UserId& user);
  RecomputeResult recompute(const meta::Txn& t, const UserId& user);

  /// Checks headroom and charges `bytes` directly, without a reservation.
  void charge(const meta::Txn& t, const UserId& user, std::uint64_t bytes);
  /// Decreases the ledger (deletions). Clamps at zero.
  void credit(const meta::Txn& t, const UserId& user, std::uint64_t bytes);

  std::optional<Reservation> find(const ReservationId& id) const;

  /// Releases pending reservations created before now - ttl. Returns count.
  std::uint64_t release_expired(std::chrono::seconds ttl);
  /// Releases every pending reservation (offline recovery). Returns count.
  std::uint64_t release_all_pending();
  /// Releases every pending reservation held by one user.
  void release_user(const meta::Txn& t, const UserId& user);

 private:
  std::uint64_t release_where(const char* sql_filter, std::optional<std::int64_t> cutoff);

  meta::MetaStore& meta_;
  BlobStore& blobs_;
  Clock clock_;
};

}  // namespace pirus
