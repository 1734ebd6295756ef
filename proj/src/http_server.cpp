#include "toxmarket/http_server.hpp"

#include "httplib.h"

namespace toxmarket {

HttpServer::HttpServer(Api& api) : api_(api), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.authorization = req.get_header_value("Authorization");
    r.idempotency_key = req.get_header_value("Idempotency-Key");
    r.body = req.body;
    const ApiResponse out = api_.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  // Plain SO_REUSEADDR: with SO_REUSEPORT a second instance could share a
  // busy port instead of failing to start.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  const std::string any = R"(/.*)";
  server_->Get(any, handler);
  server_->Post(any, handler);
  server_->Put(any, handler);
  server_->Delete(any, handler);
  server_->Patch(any, handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) fail(ErrorKind::io, "cannot bind " + host);
  } else if (!server_->bind_to_port(host, port)) {
    fail(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
  }
  return bound;
}

void HttpServer::listen() {
  if (!server_->listen_after_bind()) fail(ErrorKind::io, "HTTP listener stopped unexpectedly");
}

void HttpServer::stop() { server_->stop(); }

}  // namespace toxmarket
