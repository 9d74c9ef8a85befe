#pragma once

// Test-only model stubs and randomized corpus helpers shared by the unit and
// acceptance suites.

#include <string>
#include <vector>

#include "gumbelcf/model.hpp"
#include "gumbelcf/ngram.hpp"
#include "gumbelcf/rng.hpp"

namespace toys {

using namespace gumbelcf;

// Fixed-logits model: every context gets the same vector.
class StubModel final : public model::Model {
 public:
  StubModel(Vocab vocab, model::LogitVector logits)
      : vocab_(std::move(vocab)), logits_(std::move(logits)) {
    std::string material = "stub";
    for (double x : logits_) material += ":" + std::to_string(x);
    fingerprint_ = sha256(material);
  }

  const Vocab& vocab() const override { return vocab_; }
  model::LogitVector next_logits(std::span<const Token> context) const override {
    model::check_context(context, vocab_);
    return logits_;
  }
  const Digest& fingerprint() const override { return fingerprint_; }

 private:
  Vocab vocab_;
  model::LogitVector logits_;
  Digest fingerprint_;
};

// Two-token vocabulary (bos=0, eos=1) with constant logits; recovery of the
// reference [eos] is a single Gumbel-Max step.
inline StubModel two_token_stub(double logit_bos, double logit_eos) {
  Vocab vocab({"<bos>", "<eos>"}, 0, 1);
  return StubModel(std::move(vocab), {logit_bos, logit_eos});
}

// Adds a constant to every logit of an inner model. Reports the inner model's
// fingerprint so recovered traces replay against it (that mismatch is the
// point: same argmax, shifted logits).
class ShiftedModel final : public model::Model {
 public:
  ShiftedModel(const model::Model& inner, double shift) : inner_(inner), shift_(shift) {}

  const Vocab& vocab() const override { return inner_.vocab(); }
  model::LogitVector next_logits(std::span<const Token> context) const override {
    model::LogitVector logits = inner_.next_logits(context);
    for (double& l : logits) l += shift_;
    return logits;
  }
  const Digest& fingerprint() const override { return inner_.fingerprint(); }

 private:
  const model::Model& inner_;
  double shift_;
};

// Small n-gram trained on a random lowercase corpus.
inline model::NgramModel random_ngram(rng::UniformStream& stream, int alphabet = 6,
                                      size_t corpus_len = 400, int order = 3,
                                      double smoothing = 0.5) {
  std::string corpus;
  corpus.reserve(corpus_len);
  for (size_t i = 0; i < corpus_len; ++i) {
    corpus.push_back(static_cast<char>('a' + static_cast<int>(stream.next() * alphabet)));
  }
  return model::NgramModel::train_text(corpus, order, smoothing);
}

// Random token sequence over the model's character symbols.
inline TokenSeq random_tokens(const Vocab& vocab, rng::UniformStream& stream, size_t len) {
  TokenSeq out;
  out.reserve(len);
  for (size_t i = 0; i < len; ++i) {
    Token t;
    do {
      t = static_cast<Token>(stream.next() * vocab.size());
      t = std::min(t, static_cast<Token>(vocab.size() - 1));
    } while (t == vocab.bos() || t == vocab.eos());
    out.push_back(t);
  }
  return out;
}

// Random eos-terminated reference.
inline TokenSeq random_reference(const Vocab& vocab, rng::UniformStream& stream, size_t body_len) {
  TokenSeq ref = random_tokens(vocab, stream, body_len);
  ref.push_back(vocab.eos());
  return ref;
}

}  // namespace toys
