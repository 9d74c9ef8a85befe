#include "gumbelcf/remote.hpp"

#include "gumbelcf/errors.hpp"

namespace gumbelcf::model {

namespace {

Vocab vocab_from_handshake(const protocol::Handshake& h) {
  if (h.symbols) {
    if (h.symbols->size() != static_cast<size_t>(h.vocab_size)) {
      throw ConnectionError("handshake symbol table has " + std::to_string(h.symbols->size()) +
                            " entries but vocab_size is " + std::to_string(h.vocab_size));
    }
    return Vocab(*h.symbols, h.bos, h.eos);
  }
  // No symbol table: synthesize placeholder names so token-level operations
  // still work; text encoding against these will fail loudly.
  std::vector<std::string> placeholders;
  placeholders.reserve(static_cast<size_t>(h.vocab_size));
  for (int32_t i = 0; i < h.vocab_size; ++i) {
    placeholders.push_back("<tok" + std::to_string(i) + ">");
  }
  return Vocab(std::move(placeholders), h.bos, h.eos);
}

}  // namespace

RemoteModel::RemoteModel(protocol::LineChannel channel, int timeout_ms)
    : pipe_(std::move(channel), timeout_ms),
      vocab_(vocab_from_handshake(pipe_.handshake())),
      fingerprint_(pipe_.handshake().fingerprint) {}

LogitVector RemoteModel::next_logits(std::span<const Token> context) const {
  check_context(context, vocab_);
  std::lock_guard<std::mutex> lock(mutex_);
  uint64_t id = next_id_++;
  pipe_.send(id, context);
  LogitVector logits = pipe_.await(id);
  check_logits_finite(logits, static_cast<size_t>(vocab_.size()));
  return logits;
}

ModelPtr connect_remote(const std::string& endpoint, int timeout_ms) {
  return std::make_shared<RemoteModel>(protocol::open_endpoint(endpoint, timeout_ms), timeout_ms);
}

}  // namespace gumbelcf::model
