#include "gumbelcf/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::model {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

Token gumbel_argmax(std::span<const double> logits, std::span<const double> noise) {
  if (logits.size() != noise.size()) {
    throw DomainError("gumbel_argmax: logits and noise lengths differ (" +
                      std::to_string(logits.size()) + " vs " + std::to_string(noise.size()) + ")");
  }
  if (logits.empty()) throw DomainError("gumbel_argmax: empty logit vector");
  Token best = 0;
  double best_value = logits[0] + noise[0];
  for (size_t v = 1; v < logits.size(); ++v) {
    double value = logits[v] + noise[v];
    if (value > best_value) {
      best_value = value;
      best = static_cast<Token>(v);
    }
  }
  return best;
}

Token argmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("argmax: empty logit vector");
  Token best = 0;
  double best_value = logits[0];
  for (size_t v = 1; v < logits.size(); ++v) {
    if (logits[v] > best_value) {
      best_value = logits[v];
      best = static_cast<Token>(v);
    }
  }
  return best;
}

void check_context(std::span<const Token> context, const Vocab& vocab) {
  if (context.empty()) throw DomainError("next_logits: context must be non-empty");
  for (Token t : context) {
    if (t < 0 || t >= vocab.size()) {
      throw DomainError("next_logits: token id " + std::to_string(t) +
                        " outside vocabulary of size " + std::to_string(vocab.size()));
    }
  }
}

void check_logits_finite(const LogitVector& logits, size_t vocab_size) {
  if (logits.size() != vocab_size) {
    throw ModelError("model returned " + std::to_string(logits.size()) + " logits, expected " +
                     std::to_string(vocab_size));
  }
  for (double x : logits) {
    if (!std::isfinite(x)) throw ModelError("model returned a non-finite logit");
  }
}

}  // namespace gumbelcf::model
