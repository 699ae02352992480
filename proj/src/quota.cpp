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

#include "pirus/quota.hpp"

#include "pirus/error.hpp"
#include "pirus/records.hpp"

#include <string>
#include <vector>

namespace pirus {

namespace {

std::optional<Reservation> reservation_row(const meta::Txn& t, const ReservationId& id) {
  auto st = t.query(
      "SELECT user_id, bytes, state, blob_hash, created_at FROM reservations WHERE reservation_id = ?",
      id);
  if (!st.step()) return std::nullopt;
  Reservation r;
  r.reservation_id = id;
  r.user_id = UserId(st.text(0));
  r.bytes = static_cast<std::uint64_t>(st.integer(1));
  const auto state = st.text(2);
  r.state = state == "pending"     ? ReservationState::Pending
            : state == "committed" ? ReservationState::Committed
                                   : ReservationState::Released;
  if (!st.is_null(3)) r.blob_hash = BlobHash(st.text(3));
  r.created_at = from_millis(st.integer(4));
  return r;
}

void check_headroom(const User& u, std::uint64_t used, std::uint64_t pending, std::uint64_t bytes) {
  // used + pending may already exceed a lowered quota.
  const auto committed = used + pending;
  if (committed > u.quota_bytes || bytes > u.quota_bytes - committed)
    fail(Errc::QuotaExceeded, "quota exceeded");
}

}  // namespace

Reservation Quota::reserve(const UserId& user, std::uint64_t bytes) {
  return meta_.write([&](meta::Txn& t) { return reserve(t, user, bytes); });
}

Reservation Quota::reserve(const meta::Txn& t, const UserId& user, std::uint64_t bytes) {
  const auto u = records::load_user(t, user);
  if (u.status != UserStatus::Active) fail(Errc::Forbidden, "user disabled");
  check_headroom(u, usage(t, user), pending(t, user), bytes);
  Reservation r;
  r.reservation_id = new_id<ReservationId>();
  r.user_id = user;
  r.bytes = bytes;
  r.created_at = clock_();
  t.exec("INSERT INTO reservations(reservation_id, user_id, bytes, state, blob_hash, created_at) "
         "VALUES(?, ?, ?, 'pending', NULL, ?)",
         r.reservation_id, user, bytes, to_millis(r.created_at));
  return r;
}

void Quota::commit(const ReservationId& id, std::uint64_t actual_bytes) {
  meta_.write([&](meta::Txn& t) { commit(t, id, actual_bytes); });
}

void Quota::commit(const meta::Txn& t, const ReservationId& id, std::uint64_t actual_bytes) {
  const auto r = reservation_row(t, id);
  if (!r) fail(Errc::NotFound, "reservation not found");
  if (r->state != ReservationState::Pending) fail(Errc::Invalid, "reservation is not pending");
  if (actual_bytes > r->bytes) fail(Errc::Invalid, "commit exceeds reserved bytes");
  t.exec("UPDATE reservations SET state = 'committed', blob_hash = NULL WHERE reservation_id = ?", id);
  t.exec("INSERT INTO usage(user_id, used_bytes) VALUES(?, ?) "
         "ON CONFLICT(user_id) DO UPDATE SET used_bytes = used_bytes + excluded.used_bytes",
         r->user_id, actual_bytes);
}

void Quota::release(const ReservationId& id) {
  meta_.write([&](meta::Txn& t) { release(t, id); });
}

void Quota::release(const meta::Txn& t, const ReservationId& id) {
  const auto r = reservation_row(t, id);
  if (!r) fail(Errc::NotFound, "reservation not found");
  if (r->state == ReservationState::Released) return;
  if (r->state == ReservationState::Committed) fail(Errc::Invalid, "reservation already committed");
  if (r->blob_hash) blobs_.decref(t, *r->blob_hash);
  t.exec("UPDATE reservations SET state = 'released', blob_hash = NULL WHERE reservation_id = ?", id);
}

void Quota::attach_blob(const meta::Txn& t, const ReservationId& id, const BlobHash& hash) {
  const auto r = reservation_row(t, id);
  if (!r) fail(Errc::NotFound, "reservation not found");
  if (r->state != ReservationState::Pending || r->blob_hash)
    fail(Errc::Invalid, "reservation cannot take a blob");
  t.exec("UPDATE reservations SET blob_hash = ? WHERE reservation_id = ?", hash, id);
}

std::uint64_t Quota::usage(const UserId& user) const {
  return meta_.read([&](meta::Txn& t) {
    records::load_user(t, user);
    return usage(t, user);
  });
}

std::uint64_t Quota::usage(const meta::Txn& t, const UserId& user) const {
  auto st = t.query("SELECT used_bytes FROM usage WHERE user_id = ?", user);
  return st.step() ? static_cast<std::uint64_t>(st.integer(0)) : 0;
}

std::uint64_t Quota::pending(const meta::Txn& t, const UserId& user) const {
  auto st = t.query(
      "SELECT COALESCE(SUM(bytes), 0) FROM reservations WHERE user_id = ? AND state = 'pending'", user);
  st.step();
  return static_cast<std::uint64_t>(st.integer(0));
}

RecomputeResult Quota::recompute(const UserId& user) {
  return meta_.write([&](meta::Txn& t) { return recompute(t, user); });
}

RecomputeResult Quota::recompute(const meta::Txn& t, const UserId& user) {
  records::load_user(t, user);
  RecomputeResult r;
  r.ledger_bytes = usage(t, user);
  auto st = t.query(
      "SELECT COALESCE(SUM(v.size_bytes), 0) FROM versions v JOIN nodes n ON n.node_id = v.file_id "
      "WHERE n.owner_id = ?",
      user);
  st.step();
  r.actual_bytes = static_cast<std::uint64_t>(st.integer(0));
  if (r.repaired()) {
    t.exec("INSERT INTO usage(user_id, used_bytes) VALUES(?, ?) "
           "ON CONFLICT(user_id) DO UPDATE SET used_bytes = excluded.used_bytes",
           user, r.actual_bytes);
  }
  return r;
}

void Quota::charge(const meta::Txn& t, const UserId& user, std::uint64_t bytes) {
  const auto u = records::load_user(t, user);
  check_headroom(u, usage(t, user), pending(t, user), bytes);
  t.exec("INSERT INTO usage(user_id, used_bytes) VALUES(?, ?) "
         "ON CONFLICT(user_id) DO UPDATE SET used_bytes = used_bytes + excluded.used_bytes",
         user, bytes);
}

void Quota::credit(const meta::Txn& t, const UserId& user, std::uint64_t bytes) {
  t.exec("UPDATE usage SET used_bytes = MAX(used_bytes - ?, 0) WHERE user_id = ?", bytes, user);
}

std::optional<Reservation> Quota::find(const ReservationId& id) const {
  return meta_.read([&](meta::Txn& t) { return reservation_row(t, id); });
}

std::uint64_t Quota::release_expired(std::chrono::seconds ttl) {
  const auto cutoff = to_millis(clock_()) - std::chrono::duration_cast<std::chrono::milliseconds>(ttl).count();
  return release_where(" AND created_at < ?", cutoff);
}

std::uint64_t Quota::release_all_pending() { return release_where("", std::nullopt); }

std::uint64_t Quota::release_where(const char* sql_filter, std::optional<std::int64_t> cutoff) {
  return meta_.write([&](meta::Txn& t) {
    std::vector<ReservationId> ids;
    {
      auto st = t.prepare(std::string("SELECT reservation_id FROM reservations WHERE state = 'pending'") +
                          sql_filter);
      if (cutoff) st.bind(1, *cutoff);
      while (st.step()) ids.emplace_back(st.text(0));
    }
    for (const auto& id : ids) release(t, id);
    return static_cast<std::uint64_t>(ids.size());
  });
}

void Quota::release_user(const meta::Txn& t, const UserId& user) {
  std::vector<ReservationId> ids;
  {
    auto st = t.query("SELECT reservation_id FROM reservations WHERE user_id = ? AND state = 'pending'", user);
    while (st.step()) ids.emplace_back(st.text(0));
  }
  for (const auto& id : ids) release(t, id);
}

}  // namespace pirus
