#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "genreloom/app.hpp"
#include "genreloom/error.hpp"

namespace genreloom {

struct RouteInfo {
  std::string method;
  std::string path;  // "{id}" marks a path parameter
  std::string summary;
};

/// Every route the service answers, in registration order.
const std::vector<RouteInfo>& service_routes();

/// OpenAPI-style description of service_routes().
nlohmann::json service_description();

/// 404, 409, 422 or 502 (500 for store corruption).
int http_status_of(ErrorCode code);
/// {"code", "message", "details"}
nlohmann::json api_error(const Error& e);

class HttpService {
 public:
  explicit HttpService(App& app);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); returns false if the listener failed.
  bool run();
  /// Stops accepting and lets in-flight requests finish.
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace genreloom
