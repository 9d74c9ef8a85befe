#pragma once

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "gumbelcf/model.hpp"
#include "gumbelcf/protocol.hpp"

namespace gumbelcf::harness {

/**
 * TCP logit server. Sends the handshake first on every connection, then
 * answers requests until the peer hangs up. Malformed requests get an error
 * response ({"id":echoed-or-null,"error":...}) and the connection stays open.
 */
class LogitServer {
 public:
  /// Binds immediately; port 0 picks an ephemeral port.
  LogitServer(model::ModelPtr model, const std::string& host, int port);
  ~LogitServer();

  int port() const { return port_; }

  /// Accept loop on the calling thread; returns after stop().
  void run();

  /// Accept loop on a background thread.
  void start();
  void stop();

 private:
  void handle_connection(int fd);

  model::ModelPtr model_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::vector<std::thread> connection_threads_;
};

/// Answer protocol requests on an already-open channel (used for --stdio and
/// by the TCP server per connection). Returns when the peer closes.
void serve_channel(const model::Model& model, protocol::LineChannel& channel);

/// Blocking entry point behind the serve-logits subcommand. `endpoint` is
/// "host:port" or "stdio".
void serve_logits(model::ModelPtr model, const std::string& endpoint);

}  // namespace gumbelcf::harness
