#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "gumbelcf/errors.hpp"
#include "gumbelcf/gumbel.hpp"
#include "support/oracles.hpp"
#include "support/stats.hpp"

using namespace gumbelcf;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("inverse CDF hits the frozen quantiles") {
  // F(0) = 1/e, F(1) = exp(-1/e), F(-1) = exp(-e), inverted with extended
  // precision and frozen here.
  CHECK(std::fabs(gumbel::inverse_cdf(0.36787944117144233)) < 1e-15);
  CHECK(gumbel::inverse_cdf(0.6922006275553464) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gumbel::inverse_cdf(0.06598803584531254) == doctest::Approx(-1.0).epsilon(1e-12));
  // The same checks at the published 6-digit precision.
  CHECK(gumbel::inverse_cdf(0.692201) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(gumbel::inverse_cdf(0.065988) == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("inverse CDF rejects arguments outside (0,1)") {
  for (double u : {0.0, 1.0, -0.25, 1.75, std::nan("")}) {
    CHECK_THROWS_AS(gumbel::inverse_cdf(u), DomainError);
  }
}

TEST_CASE("inverse CDF is strictly increasing and round-trips through the CDF") {
  rng::UniformStream s(7, 0);
  double prev_u = 1e-12;
  double prev_g = gumbel::inverse_cdf(prev_u);
  for (int i = 0; i < 100'000; ++i) {
    double u = s.next();
    double g = gumbel::inverse_cdf(u);
    CHECK(std::isfinite(g));
    if (u > prev_u) {
      CHECK(g > prev_g);
    } else if (u < prev_u) {
      CHECK(g < prev_g);
    }
    double back = gumbel::cdf(g);
    CHECK(std::fabs(back - u) <= 1e-12 * u);
    prev_u = u;
    prev_g = g;
  }
}

TEST_CASE("standard sampling is the inverse CDF applied to the stream") {
  rng::UniformStream a(11, 3);
  rng::UniformStream b = a;
  for (int i = 0; i < 1000; ++i) {
    CHECK(gumbel::sample_standard(a) == gumbel::inverse_cdf(b.next()));
  }
  CHECK(a.position() == 1000);
}

TEST_CASE("standard Gumbel moments match the closed forms") {
  rng::UniformStream s(2024, 0);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = gumbel::sample_standard(s);
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / n;
  double variance = sum_sq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5772156649).epsilon(0.02));          // Euler-Mascheroni
  CHECK(std::fabs(mean - 0.5772156649) < 0.01);
  CHECK(std::fabs(variance - 1.6449340668) < 0.02);                    // pi^2 / 6
}

TEST_CASE("truncated supports hold for every draw, no tolerance") {
  rng::UniformStream s(5, 5);
  for (double tau : {-2.0, -0.5, 0.0, 1.5, 5.0}) {
    for (int i = 0; i < 20'000; ++i) {
      CHECK(gumbel::sample_lower_truncated(tau, s) >= tau);
      CHECK(gumbel::sample_upper_truncated(tau, s) < tau);
    }
  }
}

TEST_CASE("lower truncation boundary: u -> 0+ lands just above tau") {
  double g = gumbel::lower_truncated_from_uniform(0.0, 1e-300);
  CHECK(g >= 0.0);
  CHECK(g < 1e-12);
  double g15 = gumbel::lower_truncated_from_uniform(1.5, 1e-300);
  CHECK(g15 >= 1.5);
  CHECK(g15 < 1.5 + 1e-12);
}

TEST_CASE("upper truncation boundary: u -> 1- approaches tau from below") {
  double u = std::nextafter(1.0, 0.0);
  for (double tau : {-0.5, 0.75, 3.0}) {
    double g = gumbel::upper_truncated_from_uniform(tau, u);
    CHECK(g < tau);
    CHECK(g > tau - 1e-6);
  }
}

TEST_CASE("upper truncation at +inf is exactly the unconditioned quantile") {
  rng::UniformStream a(3, 0), b(3, 0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(gumbel::sample_upper_truncated(kInf, a) == gumbel::inverse_cdf(b.next()));
  }
}

TEST_CASE("truncated samplers reject non-finite bounds") {
  rng::UniformStream s(1, 1);
  CHECK_THROWS_AS(gumbel::sample_lower_truncated(kInf, s), DomainError);
  CHECK_THROWS_AS(gumbel::sample_lower_truncated(-kInf, s), DomainError);
  CHECK_THROWS_AS(gumbel::sample_lower_truncated(std::nan(""), s), DomainError);
  CHECK_THROWS_AS(gumbel::sample_upper_truncated(-kInf, s), DomainError);
  CHECK_THROWS_AS(gumbel::sample_upper_truncated(std::nan(""), s), DomainError);
}

TEST_CASE("truncated samplers agree with rejection-sampling oracles (KS)") {
  const size_t n = 100'000;
  std::mt19937_64 oracle_rng(0xfeedbeef);
  rng::UniformStream s(77, 0);

  for (double tau : {-2.0, -0.5, 0.0, 1.5, 5.0}) {
    std::vector<double> ours_lower(n), ours_upper(n);
    for (size_t i = 0; i < n; ++i) ours_lower[i] = gumbel::sample_lower_truncated(tau, s);
    for (size_t i = 0; i < n; ++i) ours_upper[i] = gumbel::sample_upper_truncated(tau, s);

    auto oracle_lower = oracles::rejection_lower_truncated(tau, n, oracle_rng);
    auto oracle_upper = oracles::rejection_upper_truncated(tau, n, oracle_rng);

    INFO("tau = ", tau);
    CHECK(teststats::ks_two_sample_p(ours_lower, oracle_lower) > 0.001);
    CHECK(teststats::ks_two_sample_p(ours_upper, oracle_upper) > 0.001);
  }
}
