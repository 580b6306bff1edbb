#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "viralens/archive.hpp"

namespace viralens {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handlers over one immutable archive. Handlers are const and
/// safe to call concurrently.
class Service {
 public:
  static constexpr std::size_t kMaxPayload = 20u * 1024u * 1024u;

  explicit Service(std::optional<ModelArchive> archive, std::string cors_origin = "*");

  HttpResponse handle_score(std::string_view image) const;
  HttpResponse handle_compare(std::string_view image_a, std::string_view image_b) const;
  HttpResponse handle_clusters() const;
  HttpResponse handle_health() const;

  bool has_archive() const noexcept { return archive_.has_value(); }
  const std::string& cors_origin() const noexcept { return cors_origin_; }

 private:
  std::optional<ModelArchive> archive_;
  std::string cors_origin_;
};

/// HTTP/1.1 front end: POST /api/score, POST /api/compare, GET /api/clusters,
/// GET /healthz.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace viralens
