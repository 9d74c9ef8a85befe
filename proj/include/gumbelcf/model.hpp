#pragma once

/**
 * Abstract autoregressive model surface.
 *
 * A Model maps a token context to one unnormalized logit per vocabulary id.
 * The contract every implementation must honour:
 *   - determinism: identical (model, context) -> bitwise-identical logits
 *     within a process;
 *   - all logits finite, vector length exactly vocab().size();
 *   - contexts are validated, ids >= V are a DomainError.
 * Models are immutable once constructed and safe to share across threads
 * unless a subclass says otherwise (the remote client serializes per
 * connection).
 */

#include <memory>
#include <span>
#include <vector>

#include "gumbelcf/digest.hpp"
#include "gumbelcf/vocab.hpp"

namespace gumbelcf::model {

using LogitVector = std::vector<double>;

class Model {
 public:
  virtual ~Model() = default;

  virtual const Vocab& vocab() const = 0;

  /// Logits over the full vocabulary for the next position after `context`.
  /// `context` must be non-empty (it begins with bos or prompt tokens).
  virtual LogitVector next_logits(std::span<const Token> context) const = 0;

  /// Content hash of parameters + vocabulary. Equal fingerprints imply
  /// bitwise-identical next_logits for every context.
  virtual const Digest& fingerprint() const = 0;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Numerically stable softmax (max-subtraction). Output is nonnegative and
/// sums to 1 within 1e-12.
std::vector<double> softmax(std::span<const double> logits);

/// Index of the maximum perturbed logit; exact ties break to the lowest id.
Token gumbel_argmax(std::span<const double> logits, std::span<const double> noise);

/// Plain argmax with the same lowest-id tie-break.
Token argmax(std::span<const double> logits);

/// Shared validation helpers for Model implementations.
void check_context(std::span<const Token> context, const Vocab& vocab);
void check_logits_finite(const LogitVector& logits, size_t vocab_size);

}  // namespace gumbelcf::model
