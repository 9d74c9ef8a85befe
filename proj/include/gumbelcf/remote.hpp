#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "gumbelcf/model.hpp"
#include "gumbelcf/protocol.hpp"

namespace gumbelcf::model {

/**
 * Model backed by a logit server. One protocol request per next_logits call;
 * requests are serialized per connection, so a handle is thread-safe but the
 * harness opens one connection per worker for throughput. The fingerprint
 * comes from the handshake; when the handshake carries no symbol table, token
 * ids still work but text encoding raises InputError.
 */
class RemoteModel final : public Model {
 public:
  RemoteModel(protocol::LineChannel channel, int timeout_ms);

  const Vocab& vocab() const override { return vocab_; }
  LogitVector next_logits(std::span<const Token> context) const override;
  const Digest& fingerprint() const override { return fingerprint_; }

 private:
  mutable std::mutex mutex_;
  mutable protocol::RequestPipe pipe_;
  mutable uint64_t next_id_ = 0;
  Vocab vocab_;
  Digest fingerprint_{};
};

/// Connect to "host:port", "tcp:host:port" or "exec:command args...".
ModelPtr connect_remote(const std::string& endpoint, int timeout_ms = 30000);

}  // namespace gumbelcf::model
