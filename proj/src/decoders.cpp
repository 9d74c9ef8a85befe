#include "gumbelcf/decoders.hpp"

#include <cmath>

#include "gumbelcf/errors.hpp"
#include "gumbelcf/gumbel.hpp"

namespace gumbelcf::decoders {

namespace {

TokenSeq working_context(const model::Model& model, std::span<const Token> prompt) {
  TokenSeq ctx;
  ctx.reserve(prompt.size() + 1);
  ctx.push_back(model.vocab().bos());
  ctx.insert(ctx.end(), prompt.begin(), prompt.end());
  return ctx;
}

// Shared loop: per step, transform logits, add fresh noise (or none), argmax.
template <typename Transform>
DecodeResult decode_loop(const model::Model& model, std::span<const Token> prompt,
                         const hindsight::DecodeParams& params, bool with_noise,
                         rng::UniformStream* stream, Transform&& transform) {
  const Vocab& vocab = model.vocab();
  const auto v_count = static_cast<size_t>(vocab.size());

  DecodeResult result;
  TokenSeq ctx = working_context(model, prompt);
  std::vector<double> perturbed(v_count);

  while (result.tokens.size() < params.max_len) {
    model::LogitVector logits = model.next_logits(ctx);
    model::check_logits_finite(logits, v_count);
    for (size_t v = 0; v < v_count; ++v) {
      perturbed[v] = transform(static_cast<Token>(v), logits[v]);
    }
    if (with_noise) {
      for (size_t v = 0; v < v_count; ++v) perturbed[v] += gumbel::sample_standard(*stream);
    }
    Token token = model::argmax(perturbed);
    result.tokens.push_back(token);
    ctx.push_back(token);
    if (token == vocab.eos()) return result;
  }
  result.truncated = true;
  return result;
}

}  // namespace

DecodeResult sample_decode(const model::Model& model, std::span<const Token> prompt,
                           double temperature, const hindsight::DecodeParams& params,
                           rng::UniformStream& stream) {
  if (!(temperature > 0.0)) {
    throw DomainError("sample_decode: temperature must be > 0, got " + std::to_string(temperature));
  }
  return decode_loop(model, prompt, params, /*with_noise=*/true, &stream,
                     [temperature](Token, double logit) { return logit / temperature; });
}

DecodeResult greedy_decode(const model::Model& model, std::span<const Token> prompt,
                           const hindsight::DecodeParams& params) {
  return decode_loop(model, prompt, params, /*with_noise=*/false, nullptr,
                     [](Token, double logit) { return logit; });
}

VocabBiasParams make_vocab_bias(const TokenSeq& reference, double alpha) {
  if (!(alpha >= 0.0)) {
    throw DomainError("vocab_bias: alpha must be >= 0, got " + std::to_string(alpha));
  }
  VocabBiasParams bias;
  bias.alpha = alpha;
  bias.reference_token_set.insert(reference.begin(), reference.end());
  return bias;
}

DecodeResult vocab_bias_decode(const model::Model& model, std::span<const Token> prompt,
                               const VocabBiasParams& bias,
                               const hindsight::DecodeParams& params,
                               rng::UniformStream& stream) {
  if (!(bias.alpha >= 0.0)) {
    throw DomainError("vocab_bias_decode: alpha must be >= 0, got " + std::to_string(bias.alpha));
  }
  const auto& token_set = bias.reference_token_set;
  return decode_loop(model, prompt, params, /*with_noise=*/true, &stream,
                     [&token_set, alpha = bias.alpha](Token v, double logit) {
                       return token_set.count(v) ? logit + alpha : logit;
                     });
}

}  // namespace gumbelcf::decoders
