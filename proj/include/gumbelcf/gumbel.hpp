#pragma once

/**
 * Standard and truncated standard Gumbel sampling.
 *
 * All sampling is inverse-transform from a UniformStream, in 64-bit IEEE-754
 * throughout, so every draw is reproducible bit-for-bit from seed material.
 * Truncated draws honour their support contracts on every draw:
 * lower-truncated values are >= tau, upper-truncated values are < tau.
 */

#include "gumbelcf/rng.hpp"

namespace gumbelcf::gumbel {

/// Quantile function of Gumbel(0,1): -log(-log u). Strictly increasing on (0,1).
/// Throws DomainError unless 0 < u < 1.
double inverse_cdf(double u);

/// CDF of Gumbel(0,1): exp(-exp(-g)).
double cdf(double g);

/// One standard Gumbel draw; consumes exactly one uniform.
double sample_standard(rng::UniformStream& stream);

/**
 * Draw from Gumbel(0,1) conditioned on G > tau (lower truncation).
 *
 * Inverse transform on u' = F(tau) + u * (1 - F(tau)), evaluated as
 *   -log(-log1p(-(1-u) * (-expm1(-exp(-tau)))))
 * which avoids cancellation for large tau. Consumes one uniform; the result
 * is >= tau for every draw. Throws DomainError on a non-finite bound.
 */
double sample_lower_truncated(double tau, rng::UniformStream& stream);

/// Same, from a caller-supplied uniform in (0,1).
double lower_truncated_from_uniform(double tau, double u);

/**
 * Draw from Gumbel(0,1) conditioned on G < tau (upper truncation).
 *
 * Closed form g = -log(exp(-tau) - log u), evaluated as a stable
 * -logaddexp(-tau, log(-log u)). tau = +inf degenerates to the unconditioned
 * quantile. Consumes one uniform; the result is < tau for every draw when tau
 * is finite. Throws DomainError on NaN or -inf bounds.
 */
double sample_upper_truncated(double tau, rng::UniformStream& stream);

/// Same, from a caller-supplied uniform in (0,1).
double upper_truncated_from_uniform(double tau, double u);

}  // namespace gumbelcf::gumbel
