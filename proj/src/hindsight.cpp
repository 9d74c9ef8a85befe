#include "gumbelcf/hindsight.hpp"

#include <cmath>
#include <limits>

#include "gumbelcf/errors.hpp"
#include "gumbelcf/gumbel.hpp"

namespace gumbelcf::hindsight {

std::string to_string(Method m) {
  switch (m) {
    case Method::BetaHindsight: return "beta-hindsight";
    case Method::VocabBias: return "vocab-bias";
    case Method::Sample: return "sample";
    case Method::Greedy: return "greedy";
  }
  throw DomainError("unknown method");
}

Method method_from_string(std::string_view name) {
  if (name == "beta-hindsight") return Method::BetaHindsight;
  if (name == "vocab-bias") return Method::VocabBias;
  if (name == "sample") return Method::Sample;
  if (name == "greedy") return Method::Greedy;
  throw ConfigError("unknown method label: " + std::string(name));
}

namespace {

TokenSeq working_context(const model::Model& model, std::span<const Token> prompt) {
  TokenSeq ctx;
  ctx.reserve(prompt.size() + 1);
  ctx.push_back(model.vocab().bos());
  ctx.insert(ctx.end(), prompt.begin(), prompt.end());
  return ctx;
}

}  // namespace

NoiseTrace recover_noise(const model::Model& model, std::span<const Token> prompt,
                         const TokenSeq& reference, rng::UniformStream& stream) {
  const Vocab& vocab = model.vocab();
  if (!ends_with_eos(reference, vocab)) {
    throw InputError("recover_noise: reference must be non-empty and eos-terminated");
  }
  for (Token t : reference) {
    if (!vocab.contains(t)) {
      throw InputError("recover_noise: reference token " + std::to_string(t) +
                       " outside vocabulary");
    }
  }

  const auto v_count = static_cast<size_t>(vocab.size());
  NoiseTrace trace;
  trace.vocab_size = static_cast<uint32_t>(v_count);
  trace.reference = reference;
  trace.noise.resize(reference.size() * v_count);
  trace.model_fingerprint = model.fingerprint();

  TokenSeq ctx = working_context(model, prompt);
  for (size_t t = 0; t < reference.size(); ++t) {
    model::LogitVector logits = model.next_logits(ctx);
    model::check_logits_finite(logits, v_count);

    Token winner = reference[t];
    double l_max = logits[0];
    for (size_t v = 1; v < v_count; ++v) l_max = std::max(l_max, logits[v]);

    // Observed token first: one lower-truncated draw establishes the ceiling.
    double g_winner =
        gumbel::sample_lower_truncated(l_max - logits[static_cast<size_t>(winner)], stream);
    double ceiling = logits[static_cast<size_t>(winner)] + g_winner;
    trace.at(t, winner) = g_winner;

    // Every other token in ascending id order, strictly below the ceiling.
    for (Token v = 0; v < vocab.size(); ++v) {
      if (v == winner) continue;
      double lv = logits[static_cast<size_t>(v)];
      double g = gumbel::sample_upper_truncated(ceiling - lv, stream);
      // g < ceiling - lv, but the sum can still round up onto the ceiling;
      // the certificate needs the perturbed logit itself strictly below it.
      while (lv + g >= ceiling) {
        g = std::nextafter(g, -std::numeric_limits<double>::infinity());
      }
      trace.at(t, v) = g;
    }

    ctx.push_back(winner);
  }
  return trace;
}

DecodeResult replay(const model::Model& model, std::span<const Token> intervened_prompt,
                    const NoiseTrace& trace, const DecodeParams& params,
                    rng::UniformStream& stream) {
  const Vocab& vocab = model.vocab();
  if (model.fingerprint() != trace.model_fingerprint) {
    throw FingerprintMismatch("replay: trace was recovered under model " +
                              to_hex(trace.model_fingerprint) + " but this model is " +
                              to_hex(model.fingerprint()));
  }
  if (trace.vocab_size != static_cast<uint32_t>(vocab.size())) {
    throw FingerprintMismatch("replay: trace vocab size " + std::to_string(trace.vocab_size) +
                              " does not match model vocab size " + std::to_string(vocab.size()));
  }
  if (!(params.beta >= 0.0)) {
    throw DomainError("replay: beta must be >= 0, got " + std::to_string(params.beta));
  }
  if (params.max_len < trace.steps()) {
    throw ConfigError("replay: max_len " + std::to_string(params.max_len) +
                      " is shorter than the trace (" + std::to_string(trace.steps()) + " steps)");
  }

  const auto v_count = static_cast<size_t>(vocab.size());
  DecodeResult result;
  TokenSeq ctx = working_context(model, intervened_prompt);
  std::vector<double> fresh(v_count);

  for (size_t t = 0; result.tokens.size() < params.max_len; ++t) {
    model::LogitVector logits = model.next_logits(ctx);
    model::check_logits_finite(logits, v_count);

    Token token;
    if (t < trace.steps()) {
      std::span<const double> g = trace.step_noise(t);
      Token best = 0;
      double best_value = logits[0] + params.beta * g[0];
      for (size_t v = 1; v < v_count; ++v) {
        double value = logits[v] + params.beta * g[v];
        if (value > best_value) {
          best_value = value;
          best = static_cast<Token>(v);
        }
      }
      token = best;
    } else {
      // Past the trace: fresh standard Gumbel noise, unscaled.
      for (size_t v = 0; v < v_count; ++v) fresh[v] = gumbel::sample_standard(stream);
      token = model::gumbel_argmax(logits, fresh);
    }

    result.tokens.push_back(token);
    ctx.push_back(token);
    if (token == vocab.eos()) return result;
  }
  result.truncated = true;
  return result;
}

GenerationRecord beta_hindsight(const model::Model& model, std::span<const Token> prompt,
                                const TokenSeq& reference,
                                std::span<const Token> intervened_prompt,
                                const DecodeParams& params, const SeedInfo& seeds) {
  rng::UniformStream recover_stream =
      rng::derive_stream(seeds.global_seed, seeds.record_id, kStageRecover, 0);
  rng::UniformStream replay_stream =
      rng::derive_stream(seeds.global_seed, seeds.record_id, kStageReplayCont, 0);

  NoiseTrace trace = recover_noise(model, prompt, reference, recover_stream);
  trace.provenance = seeds;
  DecodeResult out = replay(model, intervened_prompt, trace, params, replay_stream);

  GenerationRecord record;
  record.id = seeds.record_id;
  record.prompt.assign(prompt.begin(), prompt.end());
  record.intervened_prompt.assign(intervened_prompt.begin(), intervened_prompt.end());
  record.reference = reference;
  record.output = std::move(out.tokens);
  record.truncated = out.truncated;
  record.beta = params.beta;
  record.seed = seeds.global_seed;
  record.method = Method::BetaHindsight;
  return record;
}

bool verify_certificate(const model::Model& model, std::span<const Token> prompt,
                        const NoiseTrace& trace) {
  const auto v_count = static_cast<size_t>(model.vocab().size());
  if (trace.vocab_size != v_count) return false;

  TokenSeq ctx = working_context(model, prompt);
  for (size_t t = 0; t < trace.steps(); ++t) {
    model::LogitVector logits = model.next_logits(ctx);
    Token winner = trace.reference[t];
    double winner_value = logits[static_cast<size_t>(winner)] + trace.at(t, winner);
    for (Token v = 0; v < static_cast<Token>(v_count); ++v) {
      if (v == winner) continue;
      double value = logits[static_cast<size_t>(v)] + trace.at(t, v);
      // Strict max-condition; exact equality only survives if the tie-break
      // would still pick the reference token.
      if (value > winner_value || (value == winner_value && v < winner)) return false;
    }
    ctx.push_back(winner);
  }
  return true;
}

}  // namespace gumbelcf::hindsight
