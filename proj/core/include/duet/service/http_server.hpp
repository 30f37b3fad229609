#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "duet/error.hpp"
#include "duet/service/workbench.hpp"

namespace duet::service {

/// HTTP status for an error code: 400 bad input, 404 unknown resource,
/// 409 state-machine violation.
int http_status_for(ErrorCode code) noexcept;

/// {"ok": false, "code": ..., "status": ..., "details": [...]}
nlohmann::json error_body(const Error& error);

nlohmann::json session_to_json(const session::Session& session);

/// JSON/SSE front end over a Workbench. Routes are listed in docs/api.md.
class HttpServer {
 public:
  explicit HttpServer(Workbench& workbench,
                      std::filesystem::path static_dir = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving yet. Port 0 picks a free port. Returns the bound
  /// port; throws InvalidArgument if binding fails.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Blocking.
  void serve();
  /// bind + serve on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace duet::service
