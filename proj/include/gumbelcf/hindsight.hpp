#pragma once

/**
 * Noise recovery and beta-scaled replay.
 *
 * recover_noise() inverts the Gumbel-Max step for each reference token: the
 * observed token's noise is drawn from a lower-truncated Gumbel so its
 * perturbed logit tops the step, every other token's noise from an
 * upper-truncated Gumbel below that ceiling. By construction the recovered
 * trace certifies, at every step, that the reference token wins the argmax.
 *
 * replay() re-runs generation under an intervened prompt, adding beta times
 * the recovered noise to the new logits while the trace lasts and fresh
 * unscaled Gumbel noise beyond it. beta = 1 with the original prompt
 * reproduces the reference exactly; beta = 0 degenerates to greedy decoding
 * for the traced steps.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "gumbelcf/model.hpp"
#include "gumbelcf/rng.hpp"

namespace gumbelcf::hindsight {

/// Stream stage labels; recovery and replay randomness must never entangle.
inline constexpr const char* kStageRecover = "recover";
inline constexpr const char* kStageReplayCont = "replay-cont";

struct SeedInfo {
  uint64_t global_seed = 0;
  std::string record_id;

  friend bool operator==(const SeedInfo&, const SeedInfo&) = default;
};

/**
 * Recovered per-step, per-token Gumbel noise for one reference.
 *
 * Invariants (hold by construction, checkable via verify_certificate):
 *   - for every step t, argmax_v(recovery logits[v] + noise(t, v)) is
 *     reference[t] under the lowest-id tie-break;
 *   - noise(t, reference[t]) >= max logit - logit[reference[t]];
 *   - every other perturbed logit lies strictly below the step ceiling;
 *   - reference ends with eos.
 */
struct NoiseTrace {
  uint32_t vocab_size = 0;
  TokenSeq reference;          // length T, eos-terminated
  std::vector<double> noise;   // T x vocab_size, row-major
  Digest model_fingerprint{};
  std::optional<SeedInfo> provenance;  // in-memory only; not part of the file format

  size_t steps() const { return reference.size(); }
  double& at(size_t step, Token v) { return noise[step * vocab_size + static_cast<size_t>(v)]; }
  double at(size_t step, Token v) const {
    return noise[step * vocab_size + static_cast<size_t>(v)];
  }
  std::span<const double> step_noise(size_t step) const {
    return {noise.data() + step * vocab_size, vocab_size};
  }
};

struct DecodeParams {
  double beta = 1.0;                       // noise scale during replay; >= 0
  uint32_t max_len = 256;                  // hard cap on emitted tokens
  bool include_reference_in_prompt = true; // consumed by the harness when composing prompts
};

enum class Method { BetaHindsight, VocabBias, Sample, Greedy };
std::string to_string(Method m);
Method method_from_string(std::string_view name);

/// One counterfactual run with everything needed to rescore or reproduce it.
struct GenerationRecord {
  std::string id;
  TokenSeq prompt;
  TokenSeq intervened_prompt;
  TokenSeq reference;
  TokenSeq output;
  bool truncated = false;
  double beta = 0.0;  // beta for hindsight, alpha for vocab-bias, else unused
  uint64_t seed = 0;
  Method method = Method::BetaHindsight;
  std::optional<int> source_score;
  std::optional<int> target_score;
  std::optional<int> achieved_score;
  std::string criterion;
};

/**
 * Teacher-forced noise recovery (one lower-truncated draw for the observed
 * token, then upper-truncated draws for all other ids in ascending order;
 * exactly V uniforms per step).
 *
 * Throws InputError unless the reference is non-empty and eos-terminated;
 * ModelError on non-finite logits.
 */
NoiseTrace recover_noise(const model::Model& model, std::span<const Token> prompt,
                         const TokenSeq& reference, rng::UniformStream& stream);

/**
 * Replay a trace under an intervened prompt. `stream` supplies fresh
 * continuation noise only for steps past the trace (V uniforms per such step).
 *
 * Throws FingerprintMismatch (naming both digests) when the trace was
 * recovered under a different model; ConfigError when params.max_len is
 * shorter than the trace.
 */
DecodeResult replay(const model::Model& model, std::span<const Token> intervened_prompt,
                    const NoiseTrace& trace, const DecodeParams& params,
                    rng::UniformStream& stream);

/// Recovery followed by replay, with streams derived independently from
/// (global seed, record id) for the two stages.
GenerationRecord beta_hindsight(const model::Model& model, std::span<const Token> prompt,
                                const TokenSeq& reference,
                                std::span<const Token> intervened_prompt,
                                const DecodeParams& params, const SeedInfo& seeds);

/// Recompute recovery logits and check the strict max-condition at every step.
/// Returns true iff the certificate holds for the whole trace.
bool verify_certificate(const model::Model& model, std::span<const Token> prompt,
                        const NoiseTrace& trace);

}  // namespace gumbelcf::hindsight
