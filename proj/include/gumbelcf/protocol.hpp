#pragma once

/**
 * Logit-server wire protocol: newline-delimited JSON over a byte stream
 * (TCP socket or a pipe pair to a subprocess).
 *
 *   handshake (server -> client, first line):
 *     {"protocol":1,"vocab_size":V,"bos":id,"eos":id,"fingerprint":"<64 hex>"}
 *     plus an optional "symbols" array so text can be encoded client-side
 *   request  (client -> server): {"id":n,"context":[token ids]}
 *   response (server -> client): {"id":n,"logits":[V numbers]}
 *                             or {"id":n-or-null,"error":"message"}
 *
 * Numbers are JSON decimals carrying full 64-bit precision (shortest
 * round-trip rendering), one document per line, ids echoed verbatim.
 * Responses are matched to requests by id, never by arrival order.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gumbelcf/digest.hpp"
#include "gumbelcf/vocab.hpp"

namespace gumbelcf::protocol {

inline constexpr int kProtocolVersion = 1;

/// Line framing over a pair of file descriptors (owned). Reads are buffered
/// and poll with a timeout; timeouts and I/O failures raise ConnectionError.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd, pid_t child_pid = -1);
  ~LineChannel();
  LineChannel(LineChannel&& other) noexcept;
  LineChannel& operator=(LineChannel&& other) noexcept;
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  void write_line(const std::string& line);
  /// One line without the trailing newline; nullopt on orderly EOF.
  std::optional<std::string> read_line(int timeout_ms);
  void close();

 private:
  int read_fd_ = -1;
  int write_fd_ = -1;
  pid_t child_pid_ = -1;
  std::string buffer_;
};

struct Handshake {
  int protocol = kProtocolVersion;
  int32_t vocab_size = 0;
  Token bos = -1;
  Token eos = -1;
  Digest fingerprint{};
  std::optional<std::vector<std::string>> symbols;
};

nlohmann::json to_json(const Handshake& h);
Handshake handshake_from_json(const nlohmann::json& doc);

/**
 * Pipelined request/response matching. Any number of requests may be in
 * flight; await() returns the response for one id, stashing every other
 * response it reads along the way.
 */
class RequestPipe {
 public:
  RequestPipe(LineChannel channel, int timeout_ms);

  const Handshake& handshake() const { return handshake_; }

  void send(uint64_t id, std::span<const Token> context);

  /// Response logits for `id`. Throws ConnectionError on malformed frames
  /// (quoting the frame), server-reported errors, length mismatches against
  /// the handshake vocab_size, timeouts, and EOF.
  std::vector<double> await(uint64_t id);

 private:
  LineChannel channel_;
  int timeout_ms_;
  Handshake handshake_;
  std::map<uint64_t, std::vector<double>> pending_;
};

/// Open a channel to "host:port", "tcp:host:port" or "exec:command args..."
/// (subprocess speaking the protocol on stdin/stdout).
LineChannel open_endpoint(const std::string& endpoint, int timeout_ms);

}  // namespace gumbelcf::protocol
