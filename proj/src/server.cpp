#include "gumbelcf/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::harness {

namespace {

protocol::Handshake handshake_for(const model::Model& model) {
  protocol::Handshake h;
  h.vocab_size = model.vocab().size();
  h.bos = model.vocab().bos();
  h.eos = model.vocab().eos();
  h.fingerprint = model.fingerprint();
  h.symbols = model.vocab().symbols();
  return h;
}

nlohmann::json error_response(const nlohmann::json* id, const std::string& message) {
  nlohmann::json doc;
  doc["id"] = id ? *id : nlohmann::json(nullptr);
  doc["error"] = message;
  return doc;
}

}  // namespace

void serve_channel(const model::Model& model, protocol::LineChannel& channel) {
  channel.write_line(protocol::to_json(handshake_for(model)).dump());

  while (true) {
    std::optional<std::string> line;
    try {
      line = channel.read_line(-1);  // block until the peer speaks or hangs up
    } catch (const ConnectionError&) {
      return;
    }
    if (!line) return;
    if (line->empty()) continue;

    nlohmann::json request;
    try {
      request = nlohmann::json::parse(*line);
    } catch (const nlohmann::json::exception& e) {
      channel.write_line(error_response(nullptr, std::string("invalid JSON: ") + e.what()).dump());
      continue;
    }
    const nlohmann::json* id = request.contains("id") ? &request["id"] : nullptr;
    TokenSeq context;
    try {
      context = request.at("context").get<TokenSeq>();
    } catch (const nlohmann::json::exception& e) {
      channel.write_line(error_response(id, std::string("bad request: ") + e.what()).dump());
      continue;
    }
    try {
      model::LogitVector logits = model.next_logits(context);
      nlohmann::json response{{"id", id ? *id : nlohmann::json(nullptr)}, {"logits", logits}};
      channel.write_line(response.dump());
    } catch (const Error& e) {
      channel.write_line(error_response(id, e.what()).dump());
    }
  }
}

LogitServer::LogitServer(model::ModelPtr model, const std::string& host, int port)
    : model_(std::move(model)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ConnectionError(std::string("socket failed: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  struct sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConnectionError("serve-logits: cannot parse listen address \"" + host + "\"");
  }
  if (::bind(listen_fd_, reinterpret_cast<struct sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw ConnectionError("bind " + host + ":" + std::to_string(port) + " failed: " +
                          std::strerror(errno));
  }
  if (::listen(listen_fd_, 16) != 0) {
    throw ConnectionError(std::string("listen failed: ") + std::strerror(errno));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<struct sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

LogitServer::~LogitServer() {
  stop();
  for (auto& t : connection_threads_) {
    if (t.joinable()) t.join();
  }
}

void LogitServer::run() {
  while (!stopping_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load() || errno == EBADF || errno == EINVAL) return;
      if (errno == EINTR) continue;
      return;
    }
    connection_threads_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void LogitServer::handle_connection(int fd) {
  protocol::LineChannel channel(fd, fd);
  serve_channel(*model_, channel);
}

void LogitServer::start() {
  accept_thread_ = std::thread([this] { run(); });
}

void LogitServer::stop() {
  bool expected = false;
  if (stopping_.compare_exchange_strong(expected, true)) {
    if (listen_fd_ >= 0) {
      ::shutdown(listen_fd_, SHUT_RDWR);
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
  }
  if (accept_thread_.joinable()) accept_thread_.join();
}

void serve_logits(model::ModelPtr model, const std::string& endpoint) {
  if (endpoint == "stdio") {
    protocol::LineChannel channel(STDIN_FILENO, STDOUT_FILENO);
    serve_channel(*model, channel);
    return;
  }
  std::string addr = endpoint;
  if (addr.rfind("tcp:", 0) == 0) addr = addr.substr(4);
  size_t colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw ConnectionError("serve-logits endpoint must be host:port or stdio, got \"" + endpoint +
                          "\"");
  }
  LogitServer server(std::move(model), addr.substr(0, colon),
                     std::stoi(addr.substr(colon + 1)));
  server.run();
}

}  // namespace gumbelcf::harness
