#include "gumbelcf/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <sstream>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::protocol {

namespace {

std::string quoted_frame(const std::string& frame) {
  std::string shown = frame.size() > 200 ? frame.substr(0, 200) + "..." : frame;
  return "\"" + shown + "\"";
}

}  // namespace

LineChannel::LineChannel(int read_fd, int write_fd, pid_t child_pid)
    : read_fd_(read_fd), write_fd_(write_fd), child_pid_(child_pid) {}

LineChannel::~LineChannel() { close(); }

LineChannel::LineChannel(LineChannel&& other) noexcept
    : read_fd_(other.read_fd_),
      write_fd_(other.write_fd_),
      child_pid_(other.child_pid_),
      buffer_(std::move(other.buffer_)) {
  other.read_fd_ = other.write_fd_ = -1;
  other.child_pid_ = -1;
}

LineChannel& LineChannel::operator=(LineChannel&& other) noexcept {
  if (this != &other) {
    close();
    read_fd_ = other.read_fd_;
    write_fd_ = other.write_fd_;
    child_pid_ = other.child_pid_;
    buffer_ = std::move(other.buffer_);
    other.read_fd_ = other.write_fd_ = -1;
    other.child_pid_ = -1;
  }
  return *this;
}

void LineChannel::close() {
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  read_fd_ = write_fd_ = -1;
  if (child_pid_ > 0) {
    int status = 0;
    ::waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

void LineChannel::write_line(const std::string& line) {
  if (write_fd_ < 0) throw ConnectionError("write on closed channel");
  std::string framed = line + "\n";
  size_t sent = 0;
  while (sent < framed.size()) {
    ssize_t n = ::write(write_fd_, framed.data() + sent, framed.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("channel write failed: ") + std::strerror(errno));
    }
    sent += static_cast<size_t>(n);
  }
}

std::optional<std::string> LineChannel::read_line(int timeout_ms) {
  if (read_fd_ < 0) throw ConnectionError("read on closed channel");
  while (true) {
    size_t newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }

    struct pollfd pfd{read_fd_, POLLIN, 0};
    int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("channel poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) {
      throw ConnectionError("timed out after " + std::to_string(timeout_ms) +
                            " ms waiting for a protocol line");
    }
    char chunk[4096];
    ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("channel read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (!buffer_.empty()) {
        std::string line = std::move(buffer_);
        buffer_.clear();
        return line;
      }
      return std::nullopt;
    }
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

nlohmann::json to_json(const Handshake& h) {
  nlohmann::json doc{{"protocol", h.protocol},
                     {"vocab_size", h.vocab_size},
                     {"bos", h.bos},
                     {"eos", h.eos},
                     {"fingerprint", to_hex(h.fingerprint)}};
  if (h.symbols) doc["symbols"] = *h.symbols;
  return doc;
}

Handshake handshake_from_json(const nlohmann::json& doc) {
  Handshake h;
  h.protocol = doc.at("protocol").get<int>();
  h.vocab_size = doc.at("vocab_size").get<int32_t>();
  h.bos = doc.at("bos").get<Token>();
  h.eos = doc.at("eos").get<Token>();
  h.fingerprint = digest_from_hex(doc.at("fingerprint").get<std::string>());
  if (doc.contains("symbols")) h.symbols = doc.at("symbols").get<std::vector<std::string>>();
  return h;
}

RequestPipe::RequestPipe(LineChannel channel, int timeout_ms)
    : channel_(std::move(channel)), timeout_ms_(timeout_ms) {
  auto line = channel_.read_line(timeout_ms_);
  if (!line) throw ConnectionError("peer closed before sending a handshake");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(*line);
    handshake_ = handshake_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ConnectionError("malformed handshake frame " + quoted_frame(*line) + ": " + e.what());
  }
  if (handshake_.protocol != kProtocolVersion) {
    throw ConnectionError("unsupported protocol version " + std::to_string(handshake_.protocol) +
                          " in handshake " + quoted_frame(*line));
  }
  if (handshake_.vocab_size <= 0) {
    throw ConnectionError("handshake declares non-positive vocab_size in " + quoted_frame(*line));
  }
}

void RequestPipe::send(uint64_t id, std::span<const Token> context) {
  nlohmann::json doc{{"id", id}, {"context", std::vector<Token>(context.begin(), context.end())}};
  channel_.write_line(doc.dump());
}

std::vector<double> RequestPipe::await(uint64_t id) {
  while (true) {
    auto hit = pending_.find(id);
    if (hit != pending_.end()) {
      std::vector<double> logits = std::move(hit->second);
      pending_.erase(hit);
      return logits;
    }

    auto line = channel_.read_line(timeout_ms_);
    if (!line) throw ConnectionError("peer closed while a response was outstanding");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(*line);
    } catch (const nlohmann::json::exception& e) {
      throw ConnectionError("malformed response frame " + quoted_frame(*line) + ": " + e.what());
    }
    if (doc.contains("error")) {
      throw ConnectionError("server reported an error in frame " + quoted_frame(*line));
    }
    uint64_t got_id;
    std::vector<double> logits;
    try {
      got_id = doc.at("id").get<uint64_t>();
      logits = doc.at("logits").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConnectionError("malformed response frame " + quoted_frame(*line) + ": " + e.what());
    }
    if (logits.size() != static_cast<size_t>(handshake_.vocab_size)) {
      throw ConnectionError("response carries " + std::to_string(logits.size()) +
                            " logits but the handshake declared vocab_size " +
                            std::to_string(handshake_.vocab_size) + " in frame " +
                            quoted_frame(*line));
    }
    pending_.emplace(got_id, std::move(logits));
  }
}

namespace {

LineChannel connect_tcp(const std::string& host, const std::string& port, int timeout_ms) {
  struct addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  struct addrinfo* result = nullptr;
  int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &result);
  if (rc != 0) {
    throw ConnectionError("cannot resolve " + host + ":" + port + ": " + gai_strerror(rc));
  }
  int fd = -1;
  for (struct addrinfo* ai = result; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(result);
  if (fd < 0) throw ConnectionError("cannot connect to " + host + ":" + port);
  (void)timeout_ms;
  return LineChannel(fd, fd);
}

LineChannel spawn_subprocess(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw ConnectionError(std::string("pipe failed: ") + std::strerror(errno));
  }
  pid_t pid = ::fork();
  if (pid < 0) throw ConnectionError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<std::string> parts;
    std::istringstream words(command);
    for (std::string word; words >> word;) parts.push_back(word);
    std::vector<char*> argv;
    for (auto& p : parts) argv.push_back(p.data());
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return LineChannel(from_child[0], to_child[1], pid);
}

}  // namespace

LineChannel open_endpoint(const std::string& endpoint, int timeout_ms) {
  if (endpoint.rfind("exec:", 0) == 0) return spawn_subprocess(endpoint.substr(5));
  std::string addr = endpoint;
  if (addr.rfind("tcp:", 0) == 0) addr = addr.substr(4);
  size_t colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw ConnectionError("endpoint must be host:port, tcp:host:port or exec:command, got \"" +
                          endpoint + "\"");
  }
  return connect_tcp(addr.substr(0, colon), addr.substr(colon + 1), timeout_ms);
}

}  // namespace gumbelcf::protocol
