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

#include "pirus/service.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace pirus {

struct Config {
  std::string listen_addr = "127.0.0.1:8080";
  std::filesystem::path data_dir;
  std::uint64_t session_ttl_secs = 86400;
  std::uint64_t default_quota_bytes = 1073741824;
  std::uint64_t max_upload_bytes = 104857600;
  std::uint64_t password_hash_iterations = 100000;
  std::uint64_t reservation_ttl_secs = 3600;
  std::optional<std::string> allowed_origin;

  /// Parses a JSON object. Unknown keys, wrong types and non-positive
  /// integers are rejected with Error(Invalid). A relative data_dir is
  /// resolved against `base_dir`.
  static Config parse(std::string_view json_text, const std::filesystem::path& base_dir = {});
  static Config load(const std::filesystem::path& path);

  /// Checks cross-field rules (data_dir set, listen_addr well formed).
  void validate() const;

  /// Splits listen_addr into host and port.
  std::pair<std::string, int> listen_host_port() const;

  ServiceOptions service_options() const;
};

}  // namespace pirus
