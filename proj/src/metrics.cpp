#include "gumbelcf/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::metrics {

size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);  // b is the shorter string
  if (b.empty()) return a.size();

  std::vector<size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), size_t{0});
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diagonal = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t saved = row[j];
      if (a[i - 1] == b[j - 1]) {
        row[j] = diagonal;
      } else {
        row[j] = 1 + std::min({row[j], row[j - 1], diagonal});
      }
      diagonal = saved;
    }
  }
  return row[b.size()];
}

double similarity(std::string_view reference, std::string_view output) {
  size_t longer = std::max(reference.size(), output.size());
  if (longer == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(reference, output)) / static_cast<double>(longer);
}

double qwk(std::span<const int> predicted, std::span<const int> gold, int k) {
  if (k < 2) throw DomainError("qwk: k must be >= 2, got " + std::to_string(k));
  if (predicted.size() != gold.size() || predicted.empty()) {
    throw DomainError("qwk: score lists must be equal-length and non-empty");
  }
  auto check = [k](int s) {
    if (s < 1 || s > k) {
      throw DomainError("qwk: score " + std::to_string(s) + " outside 1.." + std::to_string(k));
    }
  };

  const auto kk = static_cast<size_t>(k);
  const auto n = static_cast<double>(predicted.size());
  std::vector<double> observed(kk * kk, 0.0);
  std::vector<double> row_marginal(kk, 0.0), col_marginal(kk, 0.0);
  for (size_t i = 0; i < predicted.size(); ++i) {
    check(predicted[i]);
    check(gold[i]);
    auto p = static_cast<size_t>(predicted[i] - 1);
    auto g = static_cast<size_t>(gold[i] - 1);
    observed[p * kk + g] += 1.0 / n;
    row_marginal[p] += 1.0 / n;
    col_marginal[g] += 1.0 / n;
  }

  double denom_scale = static_cast<double>(k - 1) * static_cast<double>(k - 1);
  double weighted_observed = 0.0, weighted_expected = 0.0;
  for (size_t i = 0; i < kk; ++i) {
    for (size_t j = 0; j < kk; ++j) {
      double d = static_cast<double>(i) - static_cast<double>(j);
      double w = d * d / denom_scale;
      weighted_observed += w * observed[i * kk + j];
      weighted_expected += w * row_marginal[i] * col_marginal[j];
    }
  }

  if (weighted_expected == 0.0) {
    // Both lists constant and equal; diagonal-only agreement counts as perfect.
    return weighted_observed == 0.0 ? 1.0 : 0.0;
  }
  return 1.0 - weighted_observed / weighted_expected;
}

EvalReport aggregate(std::span<const ScoredRecord> records, int k) {
  struct Bucket {
    std::vector<int> target, achieved;
    double similarity_sum = 0.0;
    size_t n = 0;
  };
  std::map<std::string, Bucket> buckets;

  EvalReport report;
  double similarity_sum = 0.0;
  for (const auto& r : records) {
    if (!r.target || !r.achieved || r.reference.empty()) {
      ++report.skipped;
      continue;
    }
    double sim = similarity(r.reference, r.output);
    similarity_sum += sim;
    ++report.n;

    Bucket& b = buckets[r.criterion];
    b.target.push_back(*r.target);
    b.achieved.push_back(*r.achieved);
    b.similarity_sum += sim;
    ++b.n;
  }
  if (report.n == 0) return report;

  report.mean_similarity = similarity_sum / static_cast<double>(report.n);
  double qwk_sum = 0.0;
  for (auto& [criterion, b] : buckets) {
    CriterionReport cr;
    cr.criterion = criterion;
    cr.n = b.n;
    cr.mean_similarity = b.similarity_sum / static_cast<double>(b.n);
    cr.qwk = qwk(b.achieved, b.target, k);
    qwk_sum += cr.qwk;
    report.per_criterion.push_back(std::move(cr));
  }
  report.qwk = qwk_sum / static_cast<double>(buckets.size());
  return report;
}

}  // namespace gumbelcf::metrics
