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
#include "pirus/mime.hpp"
#include "pirus/text.hpp"

#include "../support/env.hpp"
#include "../support/sha256_ref.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace pirus {
namespace {

using testing::reference_sha256_hex;

constexpr const char* kEmptyHash = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
constexpr const char* kAbcHash = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";

TEST(Sha256, ReferenceOracleFrozenValues) {
  EXPECT_EQ(reference_sha256_hex(""), kEmptyHash);
  EXPECT_EQ(reference_sha256_hex("abc"), kAbcHash);
  EXPECT_EQ(reference_sha256_hex(std::string(1000000, 'a')),
            "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST(Sha256, MatchesReferenceAcrossBlockBoundaries) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {0, 1, 3, 55, 56, 57, 63, 64, 65, 119, 120, 127, 128, 129, 1000, 4096, 65537}) {
    const auto data = testing::random_bytes(rng, n);
    EXPECT_EQ(crypto::sha256_hex(data), reference_sha256_hex(data)) << "size " << n;
  }
}

TEST(Sha256, IncrementalEqualsOneShot) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const auto data = testing::random_bytes(rng, rng() % 5000);
    crypto::Sha256 h;
    std::size_t off = 0;
    while (off < data.size()) {
      const auto step = std::min<std::size_t>(data.size() - off, 1 + rng() % 700);
      h.update(std::string_view(data).substr(off, step));
      off += step;
    }
    EXPECT_EQ(crypto::to_hex(h.finish()), reference_sha256_hex(data));
  }
}

TEST(Crypto, Pbkdf2KnownVectors) {
  const std::string salt = "salt";
  const auto d = crypto::pbkdf2_sha256(
      "passwd", std::span(reinterpret_cast<const std::uint8_t*>(salt.data()), salt.size()), 1);
  EXPECT_EQ(crypto::to_hex(d), "55ac046e56e3089fec1691c22544b605f94185216dde0465e68b9d57c20dacbc");
  const std::string nacl = "NaCl";
  const auto d2 = crypto::pbkdf2_sha256(
      "Password", std::span(reinterpret_cast<const std::uint8_t*>(nacl.data()), nacl.size()), 80000);
  EXPECT_EQ(crypto::to_hex(d2), "4ddcd8f60b98be21830cee5ef22701f9641a4418d04c0414aeff08876b34ab56");
}

TEST(Crypto, Base64UrlNoPadding) {
  std::vector<std::uint8_t> bytes(32);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(i);
  EXPECT_EQ(crypto::base64url_encode(bytes), "AAECAwQFBgcICQoLDA0ODxAREhMUFRYXGBkaGxwdHh8");
  const std::vector<std::uint8_t> ff(3, 0xff);
  EXPECT_EQ(crypto::base64url_encode(ff), "____");
  const std::vector<std::uint8_t> one{0xfb};
  EXPECT_EQ(crypto::base64url_encode(one), "-w");
  EXPECT_EQ(crypto::base64url_encode({}), "");
}

TEST(Crypto, ConstantTimeEqual) {
  const std::vector<std::uint8_t> a{1, 2, 3}, b{1, 2, 3}, c{1, 2, 4}, d{1, 2};
  EXPECT_TRUE(crypto::constant_time_equal(a, b));
  EXPECT_FALSE(crypto::constant_time_equal(a, c));
  EXPECT_FALSE(crypto::constant_time_equal(a, d));
}

TEST(Ids, Uuid4Format) {
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto u = make_uuid4();
    ASSERT_TRUE(is_uuid(u)) << u;
    EXPECT_EQ(u[14], '4');
    EXPECT_NE(std::string("89ab").find(u[19]), std::string::npos);
    seen.insert(u);
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_FALSE(is_uuid(""));
  EXPECT_FALSE(is_uuid("ABCDEFAB-0000-4000-8000-000000000000"));
  EXPECT_FALSE(is_uuid("abcdefab-0000-4000-8000-00000000000"));
  EXPECT_FALSE(is_uuid("abcdefab/0000-4000-8000-000000000000"));
}

TEST(Ids, BlobHashIsCanonical) {
  EXPECT_NO_THROW(BlobHash{kAbcHash});
  EXPECT_THROW(BlobHash{std::string(kAbcHash).substr(1)}, Error);
  std::string upper = kAbcHash;
  upper[0] = 'B';
  EXPECT_THROW(BlobHash{upper}, Error);
  EXPECT_FALSE(BlobHash::is_canonical(std::string(64, 'g')));
}

TEST(Clock, Rfc3339Millis) {
  EXPECT_EQ(format_rfc3339(from_millis(0)), "1970-01-01T00:00:00.000Z");
  EXPECT_EQ(format_rfc3339(from_millis(1700000000123)), "2023-11-14T22:13:20.123Z");
  EXPECT_EQ(format_rfc3339(from_millis(-1)), "1969-12-31T23:59:59.999Z");
  EXPECT_EQ(to_millis(from_millis(42)), 42);
}

TEST(Text, Utf8Validation) {
  EXPECT_TRUE(text::is_valid_utf8(""));
  EXPECT_TRUE(text::is_valid_utf8("plain ascii"));
  EXPECT_TRUE(text::is_valid_utf8("caf\xC3\xA9 \xE2\x82\xAC \xF0\x9F\x98\x80"));
  EXPECT_FALSE(text::is_valid_utf8("\xC0\xAF"));          // overlong
  EXPECT_FALSE(text::is_valid_utf8("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(text::is_valid_utf8("\xF4\x90\x80\x80"));  // > U+10FFFF
  EXPECT_FALSE(text::is_valid_utf8("\x80"));
  EXPECT_FALSE(text::is_valid_utf8("\xE2\x82"));
  EXPECT_TRUE(text::is_valid_utf8("ok\xE2\x82", true));
  EXPECT_FALSE(text::is_valid_utf8("\xE2\x28", true));
}

TEST(Text, Utf8LengthAndLowercase) {
  EXPECT_EQ(text::utf8_length("caf\xC3\xA9"), 4u);
  EXPECT_EQ(text::utf8_length(""), 0u);
  EXPECT_EQ(text::to_lower_ascii("AbC-\xC3\x89"), "abc-\xC3\x89");
}

TEST(Mime, SniffTable) {
  EXPECT_EQ(sniff_mime("%PDF-1.7\n...", "x"), "application/pdf");
  EXPECT_EQ(sniff_mime(std::string("\x89PNG\r\n\x1a\n\0\0", 10), "x"), "image/png");
  EXPECT_EQ(sniff_mime("\xFF\xD8\xFF\xE0", "x"), "image/jpeg");
  EXPECT_EQ(sniff_mime("GIF87a....", "x"), "image/gif");
  EXPECT_EQ(sniff_mime("GIF89a....", "x"), "image/gif");
  const std::string zip("PK\x03\x04rest", 8);
  EXPECT_EQ(sniff_mime(zip, "a.xlsx"), "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet");
  EXPECT_EQ(sniff_mime(zip, "A.DOCX"), "application/vnd.openxmlformats-officedocument.wordprocessingml.document");
  EXPECT_EQ(sniff_mime(zip, "deck.pptx"),
            "application/vnd.openxmlformats-officedocument.presentationml.presentation");
  EXPECT_EQ(sniff_mime(zip, "a.zip"), "application/zip");
  EXPECT_EQ(sniff_mime(zip, "xlsx"), "application/zip");
  EXPECT_EQ(sniff_mime("hello world", "x"), "text/plain");
  EXPECT_EQ(sniff_mime("", "empty"), "text/plain");
  EXPECT_EQ(sniff_mime(std::string("ab\0cd", 5), "x"), "application/octet-stream");
  EXPECT_EQ(sniff_mime("\xFF\xFE", "x"), "application/octet-stream");
}

TEST(Mime, FirstMatchWins) {
  // A PDF whose name ends in .xlsx is still a PDF.
  EXPECT_EQ(sniff_mime("%PDF-", "a.xlsx"), "application/pdf");
  // "%PDF" without the dash is just text.
  EXPECT_EQ(sniff_mime("%PDF", "x"), "text/plain");
}

TEST(Mime, OnlyLeading1024BytesCount) {
  std::string text(1023, 'a');
  text += "\xC3\xA9";  // character split at the 1024-byte cut
  EXPECT_EQ(sniff_mime(text, "x"), "text/plain");
  std::string late_nul(2000, 'a');
  late_nul[1500] = '\0';
  EXPECT_EQ(sniff_mime(late_nul, "x"), "text/plain");
  std::string early_nul(2000, 'a');
  early_nul[1000] = '\0';
  EXPECT_EQ(sniff_mime(early_nul, "x"), "application/octet-stream");
  // A complete but truncated sequence inside the window is still invalid.
  EXPECT_EQ(sniff_mime("abc\xE2\x82", "x"), "application/octet-stream");
}

}  // namespace
}  // namespace pirus
