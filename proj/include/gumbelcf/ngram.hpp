#pragma once

/**
 * Byte-level back-off n-gram language model.
 *
 * Logits are log Laplace-smoothed conditional counts:
 *   logit[v] = log(count(ctx, v) + a) - log(total(ctx) + V * a)
 * computed at the longest trained context suffix with nonzero total, backing
 * off one token at a time otherwise. Smoothing keeps every logit finite, so
 * the distribution is proper at every context. An unseen context under an
 * order-n model reproduces the order-(n-1) model's distribution exactly.
 */

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gumbelcf/model.hpp"

namespace gumbelcf::model {

class NgramModel final : public Model {
 public:
  /// Train on one text treated as a single bos..eos sequence. The vocabulary
  /// is the set of observed bytes plus bos/eos. Empty corpus -> ConfigError.
  static NgramModel train_text(std::string_view corpus, int order, double smoothing);

  /// Train on several texts, each its own bos..eos sequence.
  static NgramModel train_texts(std::span<const std::string> sequences, int order,
                                double smoothing);

  /// Train over a fixed vocabulary on pre-tokenized sequences (markers and
  /// control ids excluded; each sequence gets bos/eos padding internally).
  static NgramModel train_tokens(Vocab vocab, std::span<const TokenSeq> sequences, int order,
                                 double smoothing);

  const Vocab& vocab() const override { return vocab_; }
  LogitVector next_logits(std::span<const Token> context) const override;
  const Digest& fingerprint() const override { return fingerprint_; }

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }

  nlohmann::json to_json() const;
  static NgramModel from_json(const nlohmann::json& doc);
  void save(const std::string& path) const;
  static NgramModel load(const std::string& path);

 private:
  struct Row {
    std::map<Token, uint64_t> counts;
    uint64_t total = 0;
  };
  using Table = std::map<TokenSeq, Row>;

  NgramModel(Vocab vocab, int order, double smoothing);
  void count_sequence(const TokenSeq& body);
  void finalize();

  Vocab vocab_;
  int order_ = 1;
  double smoothing_ = 1.0;
  std::vector<Table> tables_;  // tables_[k]: contexts of length k, k in 0..order-1
  Digest fingerprint_{};
};

}  // namespace gumbelcf::model
