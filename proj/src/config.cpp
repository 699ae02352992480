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

#include "pirus/config.hpp"

#include "pirus/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace pirus {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { fail(Errc::Invalid, "config: " + msg); }

std::uint64_t positive(const json& v, const std::string& key) {
  const bool ok = v.is_number_unsigned() ? v.get<std::uint64_t>() > 0
                                         : v.is_number_integer() && v.get<std::int64_t>() > 0;
  if (!ok) config_error(key + " must be a positive integer");
  return v.get<std::uint64_t>();
}

std::string string_value(const json& v, const std::string& key) {
  if (!v.is_string()) config_error(key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

Config Config::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("top level must be an object");

  Config c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "listen_addr") {
      c.listen_addr = string_value(value, key);
    } else if (key == "data_dir") {
      std::filesystem::path p = string_value(value, key);
      if (p.empty()) config_error("data_dir must not be empty");
      c.data_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (key == "session_ttl_secs") {
      c.session_ttl_secs = positive(value, key);
    } else if (key == "default_quota_bytes") {
      c.default_quota_bytes = positive(value, key);
    } else if (key == "max_upload_bytes") {
      c.max_upload_bytes = positive(value, key);
    } else if (key == "password_hash_iterations") {
      c.password_hash_iterations = positive(value, key);
      if (c.password_hash_iterations > std::numeric_limits<std::uint32_t>::max())
        config_error("password_hash_iterations out of range");
    } else if (key == "reservation_ttl_secs") {
      c.reservation_ttl_secs = positive(value, key);
    } else if (key == "allowed_origin") {
      c.allowed_origin = string_value(value, key);
    } else {
      config_error("unknown key '" + key + "'");
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto base = std::filesystem::absolute(path).parent_path();
  return parse(buf.str(), base);
}

void Config::validate() const {
  if (data_dir.empty()) config_error("data_dir is required");
  listen_host_port();
}

std::pair<std::string, int> Config::listen_host_port() const {
  const auto colon = listen_addr.rfind(':');
  if (colon == std::string::npos || colon == 0) config_error("listen_addr must be host:port");
  std::string host = listen_addr.substr(0, colon);
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  const auto port_text = std::string_view(listen_addr).substr(colon + 1);
  int port = -1;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535)
    config_error("listen_addr port must be 0-65535");
  return {host, port};
}

ServiceOptions Config::service_options() const {
  ServiceOptions o;
  o.data_dir = data_dir;
  o.session_ttl = std::chrono::seconds(session_ttl_secs);
  o.default_quota_bytes = default_quota_bytes;
  o.max_upload_bytes = max_upload_bytes;
  o.password_iterations = static_cast<std::uint32_t>(password_hash_iterations);
  o.reservation_ttl = std::chrono::seconds(reservation_ttl_secs);
  return o;
}

}  // namespace pirus
