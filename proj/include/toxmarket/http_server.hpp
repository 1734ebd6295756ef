#pragma once

#include <memory>
#include <string>

#include "toxmarket/api.hpp"

namespace httplib {
class Server;
}

namespace toxmarket {

/// Binds Api to an HTTP listener.
class HttpServer {
 public:
  explicit HttpServer(Api& api);
  ~HttpServer();

  /// Binds to host:port; port 0 picks a free one. Throws ErrorKind::io when
  /// the port is busy. Returns the bound port.
  int bind(const std::string& host, int port);

  /// Serves until stop() is called. Requires a prior bind().
  void listen();
  void stop();

 private:
  Api& api_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace toxmarket
