#pragma once

/**
 * Comparison decoders: fresh-noise sampling, greedy argmax, and the
 * vocabulary-bias heuristic (add a constant alpha to the logits of every
 * token that occurs in the reference before sampling).
 *
 * All decoders share the hindsight contracts: contexts are bos ++ prompt ++
 * emitted-so-far, generation stops at eos or max_len (flagged truncated), and
 * ties break to the lowest id. Sampling decoders consume exactly V uniforms
 * per step in ascending token order, so runs are reproducible from a derived
 * stream, and vocab-bias with alpha = 0 is token-for-token identical to plain
 * sampling on the same stream.
 */

#include <set>
#include <span>

#include "gumbelcf/hindsight.hpp"
#include "gumbelcf/model.hpp"
#include "gumbelcf/rng.hpp"

namespace gumbelcf::decoders {

/// Gumbel-Max sampling of logits / temperature with fresh noise each step.
/// temperature must be > 0; the temperature -> 0 limit is greedy_decode.
DecodeResult sample_decode(const model::Model& model, std::span<const Token> prompt,
                           double temperature, const hindsight::DecodeParams& params,
                           rng::UniformStream& stream);

/// Per-step unperturbed argmax. Deterministic; consumes no randomness.
DecodeResult greedy_decode(const model::Model& model, std::span<const Token> prompt,
                           const hindsight::DecodeParams& params);

struct VocabBiasParams {
  double alpha = 0.0;                  // logit units, >= 0
  std::set<Token> reference_token_set; // distinct tokens of the reference, positions ignored
};

/// Distinct tokens occurring in a reference (eos included when the reference
/// is eos-terminated, so biased decoding can still stop).
VocabBiasParams make_vocab_bias(const TokenSeq& reference, double alpha);

/// Add alpha to the logits of every reference token, then sample with fresh
/// noise at temperature 1.
DecodeResult vocab_bias_decode(const model::Model& model, std::span<const Token> prompt,
                               const VocabBiasParams& bias,
                               const hindsight::DecodeParams& params,
                               rng::UniformStream& stream);

}  // namespace gumbelcf::decoders
