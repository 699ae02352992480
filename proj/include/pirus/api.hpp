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

#include "pirus/error.hpp"
#include "pirus/service.hpp"

#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace pirus {

struct ApiError {
  std::string code;
  std::string message;
  int http_status = 500;
};

/// Public error code for a domain error; internal conditions collapse to
/// "INTERNAL".
std::string_view api_code(Errc code) noexcept;
int http_status(Errc code) noexcept;

/// Maps any exception to the wire error. Only domain errors keep their
/// message; everything else becomes a generic INTERNAL.
ApiError map_error(std::exception_ptr error) noexcept;

struct ApiOptions {
  std::optional<std::string> allowed_origin;
  /// Served at "/" when set (browser UI assets).
  std::filesystem::path static_dir;
  std::size_t worker_threads = 32;
};

/// HTTP/JSON front end over a Service.
class ApiServer {
 public:
  ApiServer(Service& service, ApiOptions options);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port, or -1 if the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves until stop(); in-flight requests complete before it returns.
  bool run();
  void stop();
  /// Blocks until the server accepts connections (or run() failed).
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pirus
