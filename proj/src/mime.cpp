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

#include "pirus/mime.hpp"

#include "pirus/text.hpp"

#include <algorithm>
#include <cstdint>

namespace pirus {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

bool ends_with_ci(std::string_view name, std::string_view ext) {
  if (name.size() < ext.size()) return false;
  return text::to_lower_ascii(name.substr(name.size() - ext.size())) == ext;
}

}  // namespace

std::string sniff_mime(std::string_view leading, std::string_view name) {
  const bool truncated = leading.size() > kSniffBytes;
  const auto head = leading.substr(0, kSniffBytes);

  if (starts_with(head, "%PDF-")) return "application/pdf";
  if (starts_with(head, std::string_view("\x89PNG\r\n\x1a\n", 8))) return "image/png";
  if (starts_with(head, "\xFF\xD8\xFF")) return "image/jpeg";
  if (starts_with(head, "GIF87a") || starts_with(head, "GIF89a")) return "image/gif";
  if (starts_with(head, std::string_view("PK\x03\x04", 4))) {
    if (ends_with_ci(name, ".docx"))
      return "application/vnd.openxmlformats-officedocument.wordprocessingml.document";
    if (ends_with_ci(name, ".xlsx")) return "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet";
    if (ends_with_ci(name, ".pptx"))
      return "application/vnd.openxmlformats-officedocument.presentationml.presentation";
    return "application/zip";
  }
  if (head.find('\0') == std::string_view::npos && text::is_valid_utf8(head, truncated))
    return "text/plain";
  return "application/octet-stream";
}

std::string sniff_mime(std::span<const std::uint8_t> leading, std::string_view name) {
  return sniff_mime(std::string_view(reinterpret_cast<const char*>(leading.data()), leading.size()), name);
}

bool is_inline_previewable(std::string_view mime) noexcept {
  return mime == "application/pdf" || mime == "image/png" || mime == "image/jpeg" || mime == "image/gif";
}

}  // namespace pirus
