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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace pirus {

inline constexpr std::size_t kSniffBytes = 1024;
inline constexpr std::size_t kPreviewExcerptBytes = 64 * 1024;

/// Content type from the leading bytes (at most kSniffBytes are examined)
/// and, for zip containers, the file name's extension. Passing more than
/// kSniffBytes signals that the content continues, so a character split at
/// the cut does not count as invalid UTF-8.
std::string sniff_mime(std::span<const std::uint8_t> leading, std::string_view name);
std::string sniff_mime(std::string_view leading, std::string_view name);

/// Types the preview endpoint streams inline.
bool is_inline_previewable(std::string_view mime) noexcept;

}  // namespace pirus
