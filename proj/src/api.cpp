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

#include "pirus/api.hpp"

#include "pirus/mime.hpp"
#include "pirus/records.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>

namespace pirus {

namespace {

using nlohmann::json;
using httplib::Request;
using httplib::Response;

constexpr const char* kJson = "application/json";
constexpr std::size_t kStreamChunk = 64 * 1024;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

// ---- wire representations ----

json node_json(const Node& n) {
  return {{"node_id", n.node_id.str()},
          {"kind", to_string(n.kind)},
          {"name", n.name},
          {"parent_id", n.parent_id ? json(n.parent_id->str()) : json(nullptr)},
          {"owner_id", n.owner_id.str()},
          {"created_at", format_rfc3339(n.created_at)},
          {"modified_at", format_rfc3339(n.modified_at)}};
}

json node_json(const Node& n, Access rights) {
  auto j = node_json(n);
  j["rights"] = to_string(rights);
  return j;
}

json version_json(const FileVersion& v) {
  return {{"file_id", v.file_id.str()},
          {"version_number", v.version_number},
          {"blob_hash", v.blob_hash.str()},
          {"size_bytes", v.size_bytes},
          {"author_id", v.author_id.str()},
          {"comment", v.comment},
          {"created_at", format_rfc3339(v.created_at)}};
}

json user_json(const User& u, std::uint64_t used) {
  return {{"user_id", u.user_id.str()},
          {"username", u.username},
          {"role", to_string(u.role)},
          {"status", to_string(u.status)},
          {"quota_bytes", u.quota_bytes},
          {"used_bytes", used},
          {"created_at", format_rfc3339(u.created_at)}};
}

json group_json(const Group& g) {
  json members = json::array();
  for (const auto& m : g.member_ids) members.push_back(m.str());
  return {{"group_id", g.group_id.str()}, {"name", g.name}, {"member_ids", members}};
}

json share_json(const Share& s) {
  return {{"share_id", s.share_id.str()},
          {"node_id", s.node_id.str()},
          {"grantee", {{"kind", to_string(s.grantee.kind)}, {"id", s.grantee.id}}},
          {"rights", {{"read", s.rights.read}, {"write", s.rights.write}}},
          {"granted_by", s.granted_by.str()},
          {"created_at", format_rfc3339(s.created_at)}};
}

json link_json(const RootObject& r) {
  json leaves = json::array();
  for (const auto& id : r.leaves) leaves.push_back(id.str());
  return {{"link_id", r.link_id.str()},
          {"owner_id", r.owner_id.str()},
          {"name", r.name},
          {"leaf_ids", leaves},
          {"created_at", format_rfc3339(r.created_at)},
          {"modified_at", format_rfc3339(r.modified_at)}};
}

json leaf_json(const LeafDescriptor& d) {
  return {{"node_id", d.node_id.str()}, {"kind", to_string(d.kind)}, {"name", d.name}, {"rights", to_string(d.rights)}};
}

// ---- responses ----

void send_data(Response& res, const json& data, int status = 200) {
  res.status = status;
  res.set_content(dump(json{{"data", data}}), kJson);
}

void send_error(Response& res, const ApiError& e) {
  res.status = e.http_status;
  res.set_content(dump(json{{"error", {{"code", e.code}, {"message", e.message}}}}), kJson);
}

// ---- request parsing ----

json parse_body(const Request& req) {
  json body;
  try {
    body = json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const json::exception&) {
    fail(Errc::Invalid, "request body is not valid JSON");
  }
  if (!body.is_object()) fail(Errc::Invalid, "request body must be a JSON object");
  return body;
}

const json* field(const json& body, const char* key) {
  const auto it = body.find(key);
  return it == body.end() || it->is_null() ? nullptr : &*it;
}

std::string required_string(const json& body, const char* key) {
  const auto* v = field(body, key);
  if (!v || !v->is_string()) fail(Errc::Invalid, std::string(key) + " must be a string");
  return v->get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
  if (!field(body, key)) return std::nullopt;
  return required_string(body, key);
}

bool optional_bool(const json& body, const char* key) {
  const auto* v = field(body, key);
  if (!v) return false;
  if (!v->is_boolean()) fail(Errc::Invalid, std::string(key) + " must be a boolean");
  return v->get<bool>();
}

std::optional<std::uint64_t> optional_uint(const json& body, const char* key) {
  const auto* v = field(body, key);
  if (!v) return std::nullopt;
  if (!v->is_number_unsigned()) fail(Errc::Invalid, std::string(key) + " must be a non-negative integer");
  return v->get<std::uint64_t>();
}

template <class T>
std::vector<T> id_array(const json& body, const char* key) {
  std::vector<T> out;
  const auto* v = field(body, key);
  if (!v) return out;
  if (!v->is_array()) fail(Errc::Invalid, std::string(key) + " must be an array of ids");
  for (const auto& e : *v) {
    if (!e.is_string()) fail(Errc::Invalid, std::string(key) + " must be an array of ids");
    out.emplace_back(e.get<std::string>());
  }
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return n;
}

std::optional<std::int64_t> version_param(const Request& req) {
  if (!req.has_param("version")) return std::nullopt;
  const auto n = parse_uint(req.get_param_value("version"));
  if (!n || *n == 0 || *n > static_cast<std::uint64_t>(INT64_MAX)) fail(Errc::Invalid, "version must be a positive integer");
  return static_cast<std::int64_t>(*n);
}

template <class T>
T path_id(const Request& req, const char* key = "id") {
  const auto it = req.path_params.find(key);
  if (it == req.path_params.end() || !is_uuid(it->second)) fail(Errc::NotFound, "not found");
  return T(it->second);
}

std::string attachment_header(std::string_view disposition, std::string_view name) {
  std::string ascii;
  std::string encoded;
  static constexpr char kHex[] = "0123456789ABCDEF";
  for (unsigned char c : name) {
    ascii += (c < 0x20 || c >= 0x7f || c == '"' || c == '\\') ? '_' : static_cast<char>(c);
    if (std::isalnum(c) || c == '.' || c == '-' || c == '_' || c == '~') {
      encoded += static_cast<char>(c);
    } else {
      encoded += '%';
      encoded += kHex[c >> 4];
      encoded += kHex[c & 15];
    }
  }
  return std::string(disposition) + "; filename=\"" + ascii + "\"; filename*=UTF-8''" + encoded;
}

}  // namespace

std::string_view api_code(Errc code) noexcept {
  switch (code) {
    case Errc::IoError:
    case Errc::Underflow:
    case Errc::Corrupt:
      return "INTERNAL";
    default:
      return to_string(code);
  }
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::AuthRequired:
    case Errc::AuthFailed: return 401;
    case Errc::Forbidden: return 403;
    case Errc::NotFound: return 404;
    case Errc::Conflict:
    case Errc::Cycle: return 409;
    case Errc::Invalid: return 400;
    case Errc::QuotaExceeded: return 507;
    case Errc::SizeLimit: return 413;
    case Errc::LengthRequired: return 411;
    default: return 500;
  }
}

ApiError map_error(std::exception_ptr error) noexcept {
  ApiError generic{"INTERNAL", "internal error", 500};
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    const auto code = api_code(e.code());
    if (code == "INTERNAL") return generic;
    try {
      return {std::string(code), e.what(), http_status(e.code())};
    } catch (...) {
      return generic;
    }
  } catch (...) {
    return generic;
  }
}

struct ApiServer::Impl {
  Impl(Service& s, ApiOptions o) : svc(s), opts(std::move(o)) {}

  Service& svc;
  ApiOptions opts;
  httplib::Server http;

  using Handler = std::function<void(const Request&, Response&)>;

  static Handler guarded(Handler fn) {
    return [fn = std::move(fn)](const Request& req, Response& res) {
      try {
        fn(req, res);
      } catch (...) {
        send_error(res, map_error(std::current_exception()));
      }
    };
  }

  static std::string bearer_token(const Request& req) {
    const auto header = req.get_header_value("Authorization");
    constexpr std::string_view kPrefix = "Bearer ";
    if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0)
      fail(Errc::AuthRequired, "authentication required");
    return header.substr(kPrefix.size());
  }

  UserId actor(const Request& req) const { return svc.identity().validate_session(bearer_token(req)); }

  UserId admin(const Request& req) const {
    auto a = actor(req);
    const bool ok = svc.meta().read([&](meta::Txn& t) { return records::is_admin(t, a); });
    if (!ok) fail(Errc::Forbidden, "administrator role required");
    return a;
  }

  json me(const UserId& id) const {
    return svc.meta().read([&](meta::Txn& t) {
      auto u = records::load_user(t, id);
      auto j = user_json(u, svc.quota().usage(t, id));
      const auto root = records::root_of(t, id);
      j["root_id"] = root ? json(root->node_id.str()) : json(nullptr);
      return j;
    });
  }

  void upload(const Request& req, Response& res, const httplib::ContentReader& reader, UploadRequest target) {
    bool consumed = false;
    try {
      const auto who = actor(req);
      if (!req.has_header("Content-Length")) fail(Errc::LengthRequired, "Content-Length required");
      const auto length = parse_uint(req.get_header_value("Content-Length"));
      if (!length) fail(Errc::Invalid, "malformed Content-Length");
      target.content_length = *length;
      target.comment = req.get_header_value("X-Version-Comment");
      const auto result = svc.upload(who, target, [&](const ChunkSink& sink) {
        consumed = true;
        std::exception_ptr failure;
        const bool complete = reader([&](const char* data, std::size_t n) {
          if (!failure) {
            try {
              sink(std::span(reinterpret_cast<const std::uint8_t*>(data), n));
            } catch (...) {
              failure = std::current_exception();
            }
          }
          return true;  // keep draining so the connection stays usable
        });
        if (failure) std::rethrow_exception(failure);
        if (!complete) fail(Errc::Invalid, "request body incomplete");
      });
      send_data(res,
                {{"node_id", result.node.node_id.str()},
                 {"version_number", result.version.version_number},
                 {"blob_hash", result.version.blob_hash.str()},
                 {"size_bytes", result.version.size_bytes}},
                201);
    } catch (...) {
      if (!consumed) reader([](const char*, std::size_t) { return true; });
      send_error(res, map_error(std::current_exception()));
    }
  }

  void stream_version(const Request& req, Response& res, bool preview) {
    const auto who = actor(req);
    const auto id = path_id<NodeId>(req);
    const auto node = svc.catalog().get_node(who, id);
    if (!node.is_file()) fail(Errc::Invalid, "not a file");
    auto [version, reader] = svc.open_version(who, id, version_param(req));
    auto blob = std::make_shared<BlobReader>(std::move(reader));

    std::string head(std::min<std::uint64_t>(blob->size(), kSniffBytes + 1), '\0');
    head.resize(blob->read_at(0, std::span(reinterpret_cast<std::uint8_t*>(head.data()), head.size())));
    const auto mime = sniff_mime(head, node.name);

    if (preview && !is_inline_previewable(mime)) {
      json out{{"mime", mime}, {"size_bytes", version.size_bytes}};
      if (mime == "text/plain") {
        std::string excerpt(std::min<std::uint64_t>(blob->size(), kPreviewExcerptBytes), '\0');
        excerpt.resize(
            blob->read_at(0, std::span(reinterpret_cast<std::uint8_t*>(excerpt.data()), excerpt.size())));
        out["excerpt"] = std::move(excerpt);
        out["disposition"] = "inline";
      }
      send_data(res, out);
      return;
    }

    res.set_header("Content-Disposition", attachment_header(preview ? "inline" : "attachment", node.name));
    const auto size = blob->size();
    if (size <= kStreamChunk) {
      std::string body(size, '\0');
      body.resize(blob->read_at(0, std::span(reinterpret_cast<std::uint8_t*>(body.data()), body.size())));
      res.set_content(std::move(body), mime);
      return;
    }
    res.set_content_provider(size, mime, [blob](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
      std::vector<std::uint8_t> buf(std::min(length, kStreamChunk));
      const auto n = blob->read_at(offset, buf);
      if (n == 0) return false;
      return sink.write(reinterpret_cast<const char*>(buf.data()), n);
    });
  }

  void routes();
};

void ApiServer::Impl::routes() {
  const std::string v1 = "/api/v1";

  http.Get(v1 + "/health", [](const Request&, Response& res) {
    res.set_content(R"({"status":"ok"})", kJson);
  });

  // ---- auth ----
  http.Post(v1 + "/auth/login", guarded([this](const Request& req, Response& res) {
    const auto body = parse_body(req);
    const auto s = svc.identity().authenticate(required_string(body, "username"), required_string(body, "password"));
    send_data(res, {{"token", s.token}, {"expires_at", format_rfc3339(s.expires_at)}});
  }));
  http.Post(v1 + "/auth/logout", guarded([this](const Request& req, Response& res) {
    actor(req);
    svc.identity().revoke_session(bearer_token(req));
    send_data(res, json::object());
  }));
  http.Get(v1 + "/me", guarded([this](const Request& req, Response& res) { send_data(res, me(actor(req))); }));

  // ---- nodes ----
  http.Get(v1 + "/nodes/:id", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto id = path_id<NodeId>(req);
    const auto node = svc.catalog().get_node(who, id);
    send_data(res, node_json(node, svc.access().effective_rights(who, id)));
  }));
  http.Get(v1 + "/nodes/:id/children", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto kids = svc.catalog().list_children(who, path_id<NodeId>(req));
    json out = json::array();
    for (const auto& n : kids) out.push_back(node_json(n, svc.access().effective_rights(who, n.node_id)));
    send_data(res, out);
  }));
  http.Get(v1 + "/nodes/:id/shares", guarded([this](const Request& req, Response& res) {
    json out = json::array();
    for (const auto& s : svc.access().shares_of(actor(req), path_id<NodeId>(req))) out.push_back(share_json(s));
    send_data(res, out);
  }));
  http.Patch(v1 + "/nodes/:id", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto id = path_id<NodeId>(req);
    const auto body = parse_body(req);
    NodePatch patch;
    patch.name = optional_string(body, "name");
    if (auto p = optional_string(body, "parent_id")) patch.new_parent_id = NodeId(*p);
    send_data(res, node_json(svc.catalog().update_node(who, id, patch)));
  }));
  http.Delete(v1 + "/nodes/:id", guarded([this](const Request& req, Response& res) {
    const auto r = svc.catalog().delete_node(actor(req), path_id<NodeId>(req));
    send_data(res, {{"nodes_removed", r.nodes_removed}, {"bytes_freed", r.bytes_freed}});
  }));
  http.Post(v1 + "/folders", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto body = parse_body(req);
    const NodeId parent(required_string(body, "parent_id"));
    send_data(res, node_json(svc.catalog().create_folder(who, parent, required_string(body, "name"))), 201);
  }));

  // ---- files ----
  http.Post(v1 + "/files", [this](const Request& req, Response& res, const httplib::ContentReader& reader) {
    UploadRequest target;
    target.parent = NodeId(req.get_param_value("parent"));
    target.name = req.get_param_value("name");
    if (!req.has_param("parent") || !req.has_param("name")) {
      // Still authenticate first so anonymous callers get 401.
      target.parent.reset();
    }
    upload(req, res, reader, std::move(target));
  });
  http.Put(v1 + "/files/:id/content", [this](const Request& req, Response& res, const httplib::ContentReader& reader) {
    const auto it = req.path_params.find("id");
    UploadRequest target;
    target.file = NodeId(it == req.path_params.end() ? std::string() : it->second);
    upload(req, res, reader, std::move(target));
  });
  http.Get(v1 + "/files/:id/content",
           guarded([this](const Request& req, Response& res) { stream_version(req, res, false); }));
  http.Get(v1 + "/files/:id/preview",
           guarded([this](const Request& req, Response& res) { stream_version(req, res, true); }));
  http.Get(v1 + "/files/:id/versions", guarded([this](const Request& req, Response& res) {
    json out = json::array();
    for (const auto& v : svc.catalog().get_versions(actor(req), path_id<NodeId>(req))) out.push_back(version_json(v));
    send_data(res, out);
  }));
  http.Post(v1 + "/files/:id/restore", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto id = path_id<NodeId>(req);
    const auto body = parse_body(req);
    const auto k = optional_uint(body, "version");
    if (!k || *k == 0 || *k > static_cast<std::uint64_t>(INT64_MAX)) fail(Errc::Invalid, "version must be a positive integer");
    send_data(res, version_json(svc.catalog().restore_version(who, id, static_cast<std::int64_t>(*k))), 201);
  }));

  // ---- sharing ----
  http.Post(v1 + "/shares", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto body = parse_body(req);
    const NodeId node(required_string(body, "node_id"));
    const auto kind = parse_grantee_kind(required_string(body, "grantee_type"));
    const Grantee grantee{kind, required_string(body, "grantee_id")};
    const auto rights = Rights::normalized(optional_bool(body, "read"), optional_bool(body, "write"));
    send_data(res, share_json(svc.access().grant(who, node, grantee, rights)), 201);
  }));
  http.Delete(v1 + "/shares/:id", guarded([this](const Request& req, Response& res) {
    svc.access().revoke(actor(req), path_id<ShareId>(req));
    send_data(res, json::object());
  }));
  http.Get(v1 + "/shared-with-me", guarded([this](const Request& req, Response& res) {
    json out = json::array();
    for (const auto& e : svc.access().list_shared_with(actor(req))) out.push_back(node_json(e.node, e.rights));
    send_data(res, out);
  }));

  // ---- links ----
  http.Post(v1 + "/links", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto body = parse_body(req);
    const auto name = required_string(body, "name");
    send_data(res, link_json(svc.links().create_link(who, name, id_array<NodeId>(body, "leaf_ids"))), 201);
  }));
  http.Get(v1 + "/links", guarded([this](const Request& req, Response& res) {
    json out = json::array();
    for (const auto& l : svc.links().list_links(actor(req))) out.push_back(link_json(l));
    send_data(res, out);
  }));
  http.Get(v1 + "/links/:id", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto id = path_id<LinkId>(req);
    auto leaves = svc.links().resolve(who, id);
    auto out = link_json(svc.links().get_link(who, id));
    json resolved = json::array();
    for (const auto& d : leaves) resolved.push_back(leaf_json(d));
    out["leaves"] = resolved;
    send_data(res, out);
  }));
  http.Patch(v1 + "/links/:id", guarded([this](const Request& req, Response& res) {
    const auto who = actor(req);
    const auto id = path_id<LinkId>(req);
    const auto body = parse_body(req);
    send_data(res, link_json(svc.links().update_link(who, id, id_array<NodeId>(body, "add"),
                                                     id_array<NodeId>(body, "remove"))));
  }));
  http.Delete(v1 + "/links/:id", guarded([this](const Request& req, Response& res) {
    svc.links().delete_link(actor(req), path_id<LinkId>(req));
    send_data(res, json::object());
  }));

  // ---- admin ----
  http.Get(v1 + "/admin/users", guarded([this](const Request& req, Response& res) {
    const auto who = admin(req);
    json out = json::array();
    for (const auto& u : svc.identity().list_users(who)) out.push_back(user_json(u, svc.quota().usage(u.user_id)));
    send_data(res, out);
  }));
  http.Post(v1 + "/admin/users", guarded([this](const Request& req, Response& res) {
    const auto who = admin(req);
    const auto body = parse_body(req);
    const auto role = optional_string(body, "role");
    const auto quota = optional_uint(body, "quota_bytes");
    const auto u = svc.identity().create_user(who, required_string(body, "username"),
                                              required_string(body, "password"),
                                              role ? parse_role(*role) : Role::Member,
                                              quota.value_or(svc.options().default_quota_bytes));
    send_data(res, user_json(u, 0), 201);
  }));
  http.Patch(v1 + "/admin/users/:id", guarded([this](const Request& req, Response& res) {
    const auto who = admin(req);
    const auto id = path_id<UserId>(req);
    const auto body = parse_body(req);
    UserPatch patch;
    if (auto r = optional_string(body, "role")) patch.role = parse_role(*r);
    if (auto s = optional_string(body, "status")) patch.status = parse_user_status(*s);
    patch.quota_bytes = optional_uint(body, "quota_bytes");
    patch.password = optional_string(body, "password");
    const auto u = svc.identity().update_user(who, id, patch);
    send_data(res, user_json(u, svc.quota().usage(id)));
  }));
  http.Delete(v1 + "/admin/users/:id", guarded([this](const Request& req, Response& res) {
    const auto who = admin(req);
    const bool force = req.get_param_value("force") == "true";
    svc.identity().delete_user(who, path_id<UserId>(req), force);
    send_data(res, json::object());
  }));
  http.Put(v1 + "/admin/groups/:name", guarded([this](const Request& req, Response& res) {
    const auto who = admin(req);
    const auto body = parse_body(req);
    const auto it = body.find("member_ids");
    if (it == body.end() || !it->is_array()) fail(Errc::Invalid, "member_ids must be an array of ids");
    const auto name = req.path_params.at("name");
    send_data(res, group_json(svc.identity().set_group(who, name, id_array<UserId>(body, "member_ids"))));
  }));
  http.Post(v1 + "/admin/gc", guarded([this](const Request& req, Response& res) {
    admin(req);
    const auto r = svc.gc();
    send_data(res, {{"blobs_removed", r.blobs_removed},
                    {"bytes_reclaimed", r.bytes_reclaimed},
                    {"orphans_removed", r.orphans_removed}});
  }));

  // ---- cross-cutting ----
  http.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
    send_error(res, map_error(ep));
  });
  http.set_error_handler([](const Request&, Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    switch (res.status) {
      case 404: send_error(res, {"NOT_FOUND", "no such route", 404}); break;
      case 413: send_error(res, {"SIZE_LIMIT", "request body too large", 413}); break;
      case 400: send_error(res, {"INVALID", "malformed request", 400}); break;
      default:
        if (res.status >= 500) send_error(res, {"INTERNAL", "internal error", 500});
        else return httplib::Server::HandlerResponse::Unhandled;
    }
    return httplib::Server::HandlerResponse::Handled;
  });
  if (opts.allowed_origin) {
    const auto origin = *opts.allowed_origin;
    http.set_post_routing_handler([origin](const Request&, Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
      res.set_header("Access-Control-Expose-Headers", "Content-Disposition");
    });
    http.Options(R"(/api/v1/.*)", [origin](const Request&, Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, PATCH, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type, X-Version-Comment");
      res.set_header("Access-Control-Max-Age", "600");
    });
  }
  if (!opts.static_dir.empty()) http.set_mount_point("/", opts.static_dir.string());
}

ApiServer::ApiServer(Service& service, ApiOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  const auto threads = std::max<std::size_t>(impl_->opts.worker_threads, 1);
  impl_->http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  impl_->http.set_payload_max_length(std::max<std::uint64_t>(service.options().max_upload_bytes, 1 << 20));
  impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::run() { return impl_->http.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

void ApiServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace pirus
