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
#include <string>
#include <string_view>

namespace pirus::text {

/// Strict UTF-8 validation (no overlongs, no surrogates, max U+10FFFF).
/// With `allow_truncated_tail`, an incomplete sequence at the very end is
/// accepted, for buffers cut from a longer stream.
bool is_valid_utf8(std::string_view s, bool allow_truncated_tail = false) noexcept;

/// Number of code points; assumes valid UTF-8.
std::size_t utf8_length(std::string_view s) noexcept;

std::string to_lower_ascii(std::string_view s);

}  // namespace pirus::text
