#include "gumbelcf/gumbel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::gumbel {

namespace {

void require_open_unit(double u, const char* who) {
  if (!(u > 0.0) || !(u < 1.0)) {
    throw DomainError(std::string(who) + ": u must lie strictly in (0,1), got " +
                      std::to_string(u));
  }
}

// log(exp(x) + exp(y)) without overflow.
double logaddexp(double x, double y) {
  if (x < y) std::swap(x, y);
  if (std::isinf(x) && x > 0) return x;
  return x + std::log1p(std::exp(y - x));
}

}  // namespace

double inverse_cdf(double u) {
  require_open_unit(u, "inverse_gumbel_cdf");
  return -std::log(-std::log(u));
}

double cdf(double g) { return std::exp(-std::exp(-g)); }

double sample_standard(rng::UniformStream& stream) { return inverse_cdf(stream.next()); }

double lower_truncated_from_uniform(double tau, double u) {
  if (!std::isfinite(tau)) {
    throw DomainError("sample_lower_truncated: bound must be finite, got " + std::to_string(tau));
  }
  require_open_unit(u, "sample_lower_truncated");
  // u' = F(tau) + u*(1 - F(tau)) = 1 - (1-u)*(1 - F(tau)), kept in log space.
  double tail = -std::expm1(-std::exp(-tau));  // 1 - F(tau), accurate for large tau
  double g = -std::log(-std::log1p(-(1.0 - u) * tail));
  // Rounding may land a hair under the bound; the support contract is g >= tau.
  return g < tau ? tau : g;
}

double sample_lower_truncated(double tau, rng::UniformStream& stream) {
  return lower_truncated_from_uniform(tau, stream.next());
}

double upper_truncated_from_uniform(double tau, double u) {
  if (std::isnan(tau) || (std::isinf(tau) && tau < 0)) {
    throw DomainError("sample_upper_truncated: bound must be finite or +inf, got " +
                      std::to_string(tau));
  }
  require_open_unit(u, "sample_upper_truncated");
  if (std::isinf(tau)) return inverse_cdf(u);
  // g = -log(exp(-tau) - log u) = -logaddexp(-tau, log(-log u)).
  double g = -logaddexp(-tau, std::log(-std::log(u)));
  // Contract: strictly below tau even when rounding lands exactly on it.
  return g < tau ? g : std::nextafter(tau, -std::numeric_limits<double>::infinity());
}

double sample_upper_truncated(double tau, rng::UniformStream& stream) {
  return upper_truncated_from_uniform(tau, stream.next());
}

}  // namespace gumbelcf::gumbel
