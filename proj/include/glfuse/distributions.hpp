#pragma once

#include <variant>

#include "glfuse/rng.hpp"

namespace glfuse {

/// Smallest value a sampled variance may take. Only avoids an exact zero
/// from underflow; there is no statistical flooring.
inline constexpr double kVarianceFloor = 1e-300;

struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;
};

/// IG(shape, rate): density proportional to x^(-1-shape) exp(-rate / x).
struct InverseGammaParams {
  double shape = 1.0;
  double rate = 1.0;
  bool valid() const { return shape > 0.0 && rate > 0.0; }
};

/// GIG(order, chi, psi): density proportional to
/// x^(order-1) exp(-(chi / x + psi * x) / 2).
struct GigParams {
  double order = 1.0;
  double chi = 1.0;
  double psi = 1.0;
  /// (chi>0, psi>0), (chi=0, psi>0, order>0) or (chi>0, psi=0, order<0).
  bool valid() const;
};

/// Horseshoe prior on a variance v = k^2 with k ~ C+(0, 1).
struct HorseshoePrior {};

/// Lasso (exponential) prior on a variance, density exp(-v).
struct LassoPrior {};

double sample_normal(double mean, double variance, RngStream& rng);
double sample_std_normal(RngStream& rng);
double sample_gamma(double shape, double rate, RngStream& rng);
double sample_inverse_gamma(const InverseGammaParams& p, RngStream& rng);
double sample_gig(const GigParams& p, RngStream& rng);
bool sample_bernoulli(double p, RngStream& rng);

/// A horseshoe-distributed variance drawn through the inverse-gamma scale
/// mixture: aux ~ IG(1/2, 1), variance | aux ~ IG(1/2, 1/aux).
struct HalfCauchySquare {
  double variance;
  double aux;
};
HalfCauchySquare sample_halfcauchy_sq(RngStream& rng);

using Density = std::variant<NormalParams, InverseGammaParams, GigParams, HorseshoePrior, LassoPrior>;

/// Log density at x; -infinity outside the support.
///
/// Normalization: normal and inverse-gamma are normalized; GIG omits the
/// Bessel normalizer; horseshoe is the kernel -log(1 + v) - log(v)/2
/// (i.e. without log(pi)); lasso is -v, which is normalized.
double logpdf(const Density& density, double x);

}  // namespace glfuse
