#pragma once

#include <map>
#include <string>

#include "toxmarket/error.hpp"
#include "toxmarket/service.hpp"

namespace toxmarket {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string authorization;     // raw Authorization header
  std::string idempotency_key;   // Idempotency-Key header; a body field also works
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// 400 invalid input, 401 auth, 404 unknown entity, 409 state conflict,
/// 422 rejected record, 503 io or corrupt state.
int http_status(ErrorKind kind) noexcept;

/// Routes requests to one Service operation each and renders the result.
class Api {
 public:
  explicit Api(Service& service) : service_(service) {}

  ApiResponse handle(const ApiRequest& request) const;

 private:
  Service& service_;
};

}  // namespace toxmarket
