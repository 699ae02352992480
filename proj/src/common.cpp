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

#include "pirus/clock.hpp"
#include "pirus/crypto.hpp"
#include "pirus/error.hpp"
#include "pirus/ids.hpp"

#include <cstdio>
#include <ctime>

namespace pirus {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::AuthRequired: return "AUTH_REQUIRED";
    case Errc::AuthFailed: return "AUTH_FAILED";
    case Errc::Forbidden: return "FORBIDDEN";
    case Errc::NotFound: return "NOT_FOUND";
    case Errc::Conflict: return "CONFLICT";
    case Errc::Cycle: return "CYCLE";
    case Errc::Invalid: return "INVALID";
    case Errc::QuotaExceeded: return "QUOTA_EXCEEDED";
    case Errc::SizeLimit: return "SIZE_LIMIT";
    case Errc::LengthRequired: return "LENGTH_REQUIRED";
    case Errc::Internal: return "INTERNAL";
    case Errc::IoError: return "IO_ERROR";
    case Errc::Underflow: return "UNDERFLOW";
    case Errc::Corrupt: return "CORRUPT";
  }
  return "INTERNAL";
}

std::string make_uuid4() {
  auto b = crypto::random_bytes(16);
  b[6] = static_cast<std::uint8_t>((b[6] & 0x0F) | 0x40);
  b[8] = static_cast<std::uint8_t>((b[8] & 0x3F) | 0x80);
  const auto hex = crypto::to_hex(b);
  std::string out;
  out.reserve(36);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    if (i == 8 || i == 12 || i == 16 || i == 20) out.push_back('-');
    out.push_back(hex[i]);
  }
  return out;
}

bool is_uuid(std::string_view text) noexcept {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (c != '-') return false;
    } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return true;
}

BlobHash::BlobHash(std::string hex) : hex_(std::move(hex)) {
  if (!is_canonical(hex_)) fail(Errc::Invalid, "malformed blob hash");
}

bool BlobHash::is_canonical(std::string_view hex) noexcept {
  if (hex.size() != 64) return false;
  for (char c : hex)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

std::string format_rfc3339(Timestamp t) {
  const auto ms = to_millis(t);
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  int frac = static_cast<int>(ms % 1000);
  if (frac < 0) {
    frac += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

}  // namespace pirus
