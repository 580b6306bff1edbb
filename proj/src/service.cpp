#include "viralens/service.hpp"

#include "httplib.h"

#include "viralens/dss.hpp"
#include "viralens/error.hpp"
#include "viralens/report.hpp"

namespace viralens {

using json = nlohmann::json;

namespace {

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

HttpResponse error_response(int status, const std::string& message, const json& extra = json::object()) {
  json body = {{"error", message}};
  body.update(extra);
  return {status, body.dump()};
}

HttpResponse no_archive() { return error_response(503, "no model archive loaded"); }

HttpResponse too_large() {
  return error_response(413, "payload exceeds " + std::to_string(Service::kMaxPayload) + " bytes");
}

HttpResponse scoring_failure(const ScoringError& e) {
  json extra = {{"stage", e.stage()}, {"detail", e.detail()}};
  if (!e.variant().empty()) extra["variant"] = e.variant();
  const int status = e.kind() == ErrorKind::Decode ? 422 : 500;
  return error_response(status, e.what(), extra);
}

}  // namespace

Service::Service(std::optional<ModelArchive> archive, std::string cors_origin)
    : archive_(std::move(archive)), cors_origin_(std::move(cors_origin)) {
  if (archive_) archive_->validate();
}

HttpResponse Service::handle_score(std::string_view image) const {
  if (!archive_) return no_archive();
  if (image.size() > kMaxPayload) return too_large();
  if (image.empty()) return error_response(422, "no image supplied", {{"stage", "decode"}});
  try {
    return {200, report::score_json(*archive_, score(*archive_, as_bytes(image))).dump()};
  } catch (const ScoringError& e) {
    return scoring_failure(e);
  }
}

HttpResponse Service::handle_compare(std::string_view image_a, std::string_view image_b) const {
  if (!archive_) return no_archive();
  if (image_a.size() + image_b.size() > kMaxPayload) return too_large();
  if (image_a.empty() || image_b.empty()) {
    const char* which = image_a.empty() ? "a" : "b";
    return error_response(422, std::string("no image supplied for variant ") + which,
                          {{"stage", "decode"}, {"variant", which}});
  }
  try {
    return {200, report::compare_json(*archive_, compare(*archive_, as_bytes(image_a), as_bytes(image_b))).dump()};
  } catch (const ScoringError& e) {
    return scoring_failure(e);
  }
}

HttpResponse Service::handle_clusters() const {
  if (!archive_) return no_archive();
  return {200, report::clusters_json(*archive_).dump()};
}

HttpResponse Service::handle_health() const {
  json body = {{"status", "ok"}, {"archive_loaded", archive_.has_value()}};
  if (archive_) body["model_version"] = model_version(*archive_);
  return {200, body.dump()};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  explicit Impl(const Service& s) : service(s) {}
  const Service& service;
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

// Multipart field, or the raw body for non-multipart requests.
std::string field(const httplib::Request& req, const char* name) {
  if (req.is_multipart_form_data()) return req.has_file(name) ? req.get_file_value(name).content : std::string{};
  return req.body;
}

}  // namespace

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  const Service& svc = impl_->service;
  srv.set_payload_max_length(Service::kMaxPayload);
  srv.set_default_headers({{"Access-Control-Allow-Origin", svc.cors_origin()},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});

  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.handle_health()); });
  srv.Get("/api/clusters", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.handle_clusters()); });
  srv.Post("/api/score", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.handle_score(field(req, "image")));
  });
  srv.Post("/api/compare", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      send(res, error_response(422, "compare expects multipart fields image_a and image_b"));
      return;
    }
    send(res, svc.handle_compare(field(req, "image_a"), field(req, "image_b")));
  });
  // Oversized bodies are rejected by httplib before routing.
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const HttpResponse r = res.status == 413 ? too_large() : error_response(res.status, httplib::status_message(res.status));
      res.set_content(r.body, r.content_type);
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) fail(ErrorKind::Io, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) fail(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() {
  if (!impl_->server.listen_after_bind()) fail(ErrorKind::Io, "server stopped with an error");
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace viralens
