#pragma once

/**
 * Evaluation metrics: character-level edit similarity and quadratic weighted
 * kappa over ordinal scores, plus report aggregation.
 */

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gumbelcf/hindsight.hpp"

namespace gumbelcf::metrics {

/// Integer rubric score on a declared 1..k scale.
struct OrdinalScore {
  int value = 1;
  int k = 2;
};

/// Minimum single-character insert/delete/substitute edits. Symmetric.
size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - Lev(a,b) / max(|a|,|b|), in [0,1]; 1 iff a == b. Two empty strings are
/// identical, so the value is defined as 1.0.
double similarity(std::string_view reference, std::string_view output);

/**
 * Quadratic weighted kappa between two equal-length score lists on a 1..k
 * scale: kappa = 1 - sum(w*O) / sum(w*E) with weights (i-j)^2/(k-1)^2, O the
 * normalized confusion matrix and E the outer product of its marginals.
 * The degenerate case sum(w*E) = 0 (both lists constant and equal) is defined
 * as 1.0 when O is diagonal-only, else 0.0.
 */
double qwk(std::span<const int> predicted, std::span<const int> gold, int k);

struct CriterionReport {
  std::string criterion;
  double mean_similarity = 0.0;
  double qwk = 0.0;
  size_t n = 0;
};

struct EvalReport {
  size_t n = 0;                 // records scored
  size_t skipped = 0;           // records missing required fields
  double mean_similarity = 0.0; // arithmetic mean over scored records
  double qwk = 0.0;             // macro-average of per-criterion QWK
  std::vector<CriterionReport> per_criterion;
};

/// Scored view of one generation, decoupled from token representations.
struct ScoredRecord {
  std::string reference;
  std::string output;
  std::optional<int> target;
  std::optional<int> achieved;
  std::string criterion;
};

/// Aggregate records into a report: per-criterion QWK over (target, achieved)
/// pairs, then macro-averaged; mean similarity over all scored records.
/// Records missing any required field are skipped and counted.
EvalReport aggregate(std::span<const ScoredRecord> records, int k);

}  // namespace gumbelcf::metrics
