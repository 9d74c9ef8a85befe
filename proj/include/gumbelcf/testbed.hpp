#pragma once

/**
 * Synthetic ordinal-scoring testbed.
 *
 * k score classes share one symbol alphabet split into a high-register group
 * H = {a..m} and a low-register group L = {n..z}. Class c text draws from H
 * with probability class_mix[c], so a deterministic rubric (the fraction of
 * alphabetic characters falling in H, cut at fixed thresholds) separates the
 * classes while leaving enough overlap for similarity and validity to trade
 * off. One n-gram table is trained per class over the shared vocabulary; a
 * dedicated control token as the first prompt token selects the table, which
 * is what makes prompt interventions (change the control token) meaningful.
 */

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gumbelcf/dataset.hpp"
#include "gumbelcf/ngram.hpp"
#include "gumbelcf/rng.hpp"

namespace gumbelcf::testbed {

struct TestbedSpec {
  int k = 4;
  std::vector<double> class_mix = {0.2, 0.4, 0.6, 0.8};  // P(high-register), ascending in class
  std::vector<double> thresholds = {0.3, 0.5, 0.7};      // k-1 ascending cut points in (0,1)
  double mean_len = 60.0;                                // geometric sequence-length mean
  size_t corpus_chars_per_class = 20000;
  int ngram_order = 3;
  double smoothing = 0.001;
  // Probability that a symbol is the within-group successor of the previous
  // one (successor tables are shared across classes). Structure makes the
  // conditionals peaked, the way real language models are; with flat
  // conditionals every step is a near-tie and no decoder can steer
  // similarity.
  double structure_weight = 0.95;
  // Probability that a symbol keeps the previous symbol's register group
  // instead of re-drawing it from class_mix. Persistence concentrates the
  // class contrast in occasional register switches: per-step conditionals
  // stay nearly class-neutral (so replayed noise can hold a reference
  // prefix) while the long-run high-register fraction still converges to
  // class_mix[c], which is what the rubric measures.
  double register_persistence = 0.9;
  // Probability that a structured symbol takes the secondary successor
  // instead of the primary one. Branch points give every step a close
  // alternative with a modest logit gap, which is what scaled-down replay
  // noise can still decide; without them low-beta replay degenerates to
  // greedy chains.
  double branch_secondary = 0.35;
  uint64_t seed = 0;
};

/// Throws ConfigError when fields violate the contract (thresholds not
/// strictly ascending in (0,1), class_mix not strictly ascending, ...).
void validate(const TestbedSpec& spec);

/**
 * k per-class n-gram tables behind one vocabulary. The first prompt token
 * must be a control token; it selects the class table and is stripped (along
 * with any other control ids) before the table sees the context.
 */
class ConditionedModel final : public model::Model {
 public:
  ConditionedModel(std::vector<model::NgramModel> class_models, std::vector<Token> control_tokens);

  const Vocab& vocab() const override { return class_models_.front().vocab(); }
  model::LogitVector next_logits(std::span<const Token> context) const override;
  const Digest& fingerprint() const override { return fingerprint_; }

  int num_classes() const { return static_cast<int>(class_models_.size()); }
  Token control_token(int score_class) const;  // score_class in 1..k
  const model::NgramModel& class_model(int score_class) const;

 private:
  std::vector<model::NgramModel> class_models_;
  std::vector<Token> control_tokens_;
  Digest fingerprint_{};
};

struct TestbedBundle {
  TestbedSpec spec;
  std::shared_ptr<const ConditionedModel> model;
  std::vector<double> thresholds;
  std::vector<harness::DatasetRecord> dataset;
};

/// Deterministically generate per-class corpora, train the class tables and
/// assemble the conditioned model. Identical spec -> byte-identical bundle.
TestbedBundle build_testbed(const TestbedSpec& spec);

/// Fraction of alphabetic characters in the high-register group, cut at the
/// thresholds: score = 1 + #{t : f > t} (strictly greater; equality does not
/// pass a cut). Empty or non-alphabetic text scores 1.
int rule_score(std::string_view text, std::span<const double> thresholds);

/**
 * Stratified transition dataset: reference texts are sampled from each class
 * model, kept only when the rubric confirms their class, and spread uniformly
 * over all ordered score transitions (z, z') with z != z' (counts differ by
 * at most one, `cap` records in total). Throws ConfigError when a class
 * cannot produce enough valid references within a 10x oversampling budget.
 */
std::vector<harness::DatasetRecord> build_transition_dataset(const TestbedBundle& bundle,
                                                             size_t cap,
                                                             rng::UniformStream& stream);

/// Bundle persistence: a directory with one model JSON per class, a scorer
/// JSON (thresholds) and the dataset JSONL.
void save_bundle(const TestbedBundle& bundle, const std::string& dir);
TestbedBundle load_bundle(const std::string& dir);

}  // namespace gumbelcf::testbed
