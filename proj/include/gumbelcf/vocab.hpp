#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gumbelcf {

using Token = int32_t;
using TokenSeq = std::vector<Token>;

/**
 * Dense token vocabulary with reserved begin/end markers.
 *
 * Ids run 0..size()-1. Each id carries a display string; single-byte symbols
 * map straight to text, multi-byte symbols (markers, control tokens) are
 * matched greedily during encoding. bos/eos never round-trip through text:
 * decode() drops them, encode() never produces them.
 */
class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> symbols, Token bos, Token eos);

  Token size() const { return static_cast<Token>(symbols_.size()); }
  Token bos() const { return bos_; }
  Token eos() const { return eos_; }
  const std::string& symbol(Token id) const;
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool contains(Token id) const { return id >= 0 && id < size(); }

  /// Text -> ids by greedy longest symbol match. Throws InputError when a
  /// position matches no symbol, naming the offending character and offset.
  TokenSeq encode(std::string_view text) const;

  /// Ids -> text. bos/eos are skipped; everything else contributes its
  /// display string. Throws InputError on out-of-range ids.
  std::string decode(std::span<const Token> tokens) const;

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::vector<std::string> symbols_;
  Token bos_ = -1;
  Token eos_ = -1;
};

bool ends_with_eos(const TokenSeq& seq, const Vocab& vocab);

/// Output of one decode pass: token sequence plus whether the length cap cut
/// it off before eos (flagged, not an error).
struct DecodeResult {
  TokenSeq tokens;
  bool truncated = false;
};

}  // namespace gumbelcf
