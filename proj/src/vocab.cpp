#include "gumbelcf/vocab.hpp"

#include "gumbelcf/errors.hpp"

namespace gumbelcf {

Vocab::Vocab(std::vector<std::string> symbols, Token bos, Token eos)
    : symbols_(std::move(symbols)), bos_(bos), eos_(eos) {
  auto v = static_cast<Token>(symbols_.size());
  if (bos_ < 0 || bos_ >= v || eos_ < 0 || eos_ >= v || bos_ == eos_) {
    throw ConfigError("Vocab: bos/eos ids must be distinct and within 0.." +
                      std::to_string(v - 1));
  }
  for (const auto& s : symbols_) {
    if (s.empty()) throw ConfigError("Vocab: empty display symbol");
  }
}

const std::string& Vocab::symbol(Token id) const {
  if (!contains(id)) {
    throw InputError("Vocab: token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(size()));
  }
  return symbols_[static_cast<size_t>(id)];
}

TokenSeq Vocab::encode(std::string_view text) const {
  TokenSeq out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) {
    Token best = -1;
    size_t best_len = 0;
    for (Token id = 0; id < size(); ++id) {
      if (id == bos_ || id == eos_) continue;
      const std::string& sym = symbols_[static_cast<size_t>(id)];
      if (sym.size() > best_len && text.compare(pos, sym.size(), sym) == 0) {
        best = id;
        best_len = sym.size();
      }
    }
    if (best < 0) {
      throw InputError("Vocab::encode: no symbol matches text at offset " + std::to_string(pos) +
                       " (byte 0x" + std::to_string(static_cast<unsigned char>(text[pos])) + ")");
    }
    out.push_back(best);
    pos += best_len;
  }
  return out;
}

std::string Vocab::decode(std::span<const Token> tokens) const {
  std::string out;
  for (Token id : tokens) {
    if (id == bos_ || id == eos_) continue;
    out += symbol(id);
  }
  return out;
}

bool ends_with_eos(const TokenSeq& seq, const Vocab& vocab) {
  return !seq.empty() && seq.back() == vocab.eos();
}

}  // namespace gumbelcf
