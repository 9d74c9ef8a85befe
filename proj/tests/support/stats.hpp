#pragma once

// Statistical helpers for the test suites: regularized incomplete gamma for
// chi-square p-values, two-sample Kolmogorov-Smirnov, and the binomial sign
// test. Everything here is test-side machinery, independent of the library
// under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace teststats {

// Regularized upper incomplete gamma Q(a, x) via series / continued fraction.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;

  auto series_p = [&] {  // P(a,x) by series, good for x < a+1
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  };
  auto contfrac_q = [&] {  // Q(a,x) by continued fraction, good for x >= a+1
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
      double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
      b += 2.0;
      d = an * d + b;
      if (std::fabs(d) < tiny) d = tiny;
      c = b + an / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  };

  return x < a + 1.0 ? 1.0 - series_p() : contfrac_q();
}

// P-value of a chi-square statistic with the given degrees of freedom.
inline double chi_square_p(double statistic, double dof) {
  return gamma_q(dof / 2.0, statistic / 2.0);
}

// Goodness-of-fit: observed counts vs expected probabilities.
inline double chi_square_gof_p(const std::vector<size_t>& observed,
                               const std::vector<double>& expected_probability) {
  if (observed.size() != expected_probability.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof_p: size mismatch");
  }
  double n = 0.0;
  for (size_t c : observed) n += static_cast<double>(c);
  double statistic = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    double expected = n * expected_probability[i];
    if (expected <= 0.0) throw std::invalid_argument("chi_square_gof_p: zero expected count");
    double d = static_cast<double>(observed[i]) - expected;
    statistic += d * d / expected;
  }
  return chi_square_p(statistic, static_cast<double>(observed.size() - 1));
}

// Independence test on an r x c contingency table of counts.
inline double chi_square_independence_p(const std::vector<std::vector<size_t>>& table) {
  size_t rows = table.size();
  size_t cols = table.front().size();
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double n = 0.0;
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      row_sum[i] += static_cast<double>(table[i][j]);
      col_sum[j] += static_cast<double>(table[i][j]);
      n += static_cast<double>(table[i][j]);
    }
  }
  double statistic = 0.0;
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      double expected = row_sum[i] * col_sum[j] / n;
      if (expected <= 0.0) continue;
      double d = static_cast<double>(table[i][j]) - expected;
      statistic += d * d / expected;
    }
  }
  return chi_square_p(statistic, static_cast<double>((rows - 1) * (cols - 1)));
}

// Asymptotic Kolmogorov-Smirnov tail Q_KS(lambda).
inline double ks_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

// Two-sample KS test p-value.
inline double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d_max = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d_max = std::max(d_max, std::fabs(fa - fb));
  }
  double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
              static_cast<double>(a.size() + b.size());
  double sqrt_ne = std::sqrt(ne);
  return ks_q((sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d_max);
}

// One-sided paired sign test: P(X >= positives) for X ~ Binomial(n, 1/2),
// ties excluded by the caller.
inline double sign_test_p(size_t positives, size_t n) {
  if (positives > n) throw std::invalid_argument("sign_test_p: positives > n");
  double log_half = std::log(0.5);
  double p = 0.0;
  for (size_t k = positives; k <= n; ++k) {
    double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                      std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0) +
                      static_cast<double>(n) * log_half;
    p += std::exp(log_term);
  }
  return std::min(1.0, p);
}

}  // namespace teststats
