#include "glfuse/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "glfuse/errors.hpp"

namespace glfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double floor_variance(double x) { return std::max(x, kVarianceFloor); }

// Mode of y^(lambda-1) exp(-omega/2 (y + 1/y)), lambda >= 0.
double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  }
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without mode shift; T-concave region with small lambda.
double gig_rou_noshift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Ratio-of-uniforms with mode shift, for lambda > 2 or omega > 3.
double gig_rou_shift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Roots of the cubic giving the bounding rectangle.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Rejection from a three-piece hat; covers the non-T-concave corner
// 0 <= lambda < 1, omega <= 0.2.
double gig_nonconcave(double lambda, double omega, RngStream& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  area[0] = k0 * x0;

  double k1, k2;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                            : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];

  for (;;) {
    double v = total * rng.uniform();
    double x, hx;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else if ((v -= area[0]) <= area[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area[1];
      const double start = std::max(x0, 2.0 / omega);
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * start) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace

bool GigParams::valid() const {
  if (!std::isfinite(order) || !std::isfinite(chi) || !std::isfinite(psi)) return false;
  if (chi > 0.0 && psi > 0.0) return true;
  if (chi == 0.0 && psi > 0.0) return order > 0.0;
  if (chi > 0.0 && psi == 0.0) return order < 0.0;
  return false;
}

double sample_std_normal(RngStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_normal(double mean, double variance, RngStream& rng) {
  if (!(variance >= 0.0)) {
    throw ParameterError(fmt::format("sample_normal: variance must be >= 0, got {}", variance));
  }
  if (variance == 0.0) return mean;
  return mean + std::sqrt(variance) * sample_std_normal(rng);
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw ParameterError(fmt::format("sample_gamma: need shape > 0 and rate > 0, got ({}, {})", shape, rate));
  }
  // Marsaglia & Tsang (2000); shape < 1 boosted through U^(1/shape).
  const bool boost = shape < 1.0;
  const double a = boost ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double draw;
  for (;;) {
    const double x = sample_std_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      draw = d * v;
      break;
    }
  }
  if (boost) draw *= std::pow(rng.uniform(), 1.0 / shape);
  return draw / rate;
}

double sample_inverse_gamma(const InverseGammaParams& p, RngStream& rng) {
  if (!p.valid() || !std::isfinite(p.shape) || !std::isfinite(p.rate)) {
    throw ParameterError(fmt::format("sample_inverse_gamma: invalid IG({}, {})", p.shape, p.rate));
  }
  // 1 / Gamma(shape, rate=1) scaled by rate keeps huge rates representable.
  const double g = sample_gamma(p.shape, 1.0, rng);
  return floor_variance(p.rate / std::max(g, std::numeric_limits<double>::min()));
}

double sample_gig(const GigParams& p, RngStream& rng) {
  if (!p.valid()) {
    throw ParameterError(fmt::format("sample_gig: invalid GIG({}, {}, {})", p.order, p.chi, p.psi));
  }
  if (p.chi == 0.0) return floor_variance(sample_gamma(p.order, p.psi / 2.0, rng));
  if (p.psi == 0.0) return sample_inverse_gamma({-p.order, p.chi / 2.0}, rng);

  // Standardize: X = alpha * Y with Y ~ GIG(lambda, omega, omega); negative
  // orders use Y^-1 ~ GIG(-lambda, omega, omega).
  const double lambda = std::abs(p.order);
  const double alpha = std::sqrt(p.chi / p.psi);
  const double omega = std::sqrt(p.chi * p.psi);

  double y;
  if (lambda > 2.0 || omega > 3.0) {
    y = gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    y = gig_rou_noshift(lambda, omega, rng);
  } else {
    y = gig_nonconcave(lambda, omega, rng);
  }
  return floor_variance(p.order < 0.0 ? alpha / y : alpha * y);
}

bool sample_bernoulli(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError(fmt::format("sample_bernoulli: probability out of [0, 1]: {}", p));
  }
  return rng.uniform() < p;
}

HalfCauchySquare sample_halfcauchy_sq(RngStream& rng) {
  const double aux = sample_inverse_gamma({0.5, 1.0}, rng);
  const double variance = sample_inverse_gamma({0.5, 1.0 / aux}, rng);
  return {variance, aux};
}

double logpdf(const Density& density, double x) {
  struct Visitor {
    double x;
    double operator()(const NormalParams& p) const {
      if (!(p.variance > 0.0)) throw ParameterError("logpdf: normal variance must be > 0");
      const double r = x - p.mean;
      return -0.5 * std::log(2.0 * std::numbers::pi * p.variance) - 0.5 * r * r / p.variance;
    }
    double operator()(const InverseGammaParams& p) const {
      if (!p.valid()) throw ParameterError("logpdf: invalid inverse-gamma parameters");
      if (!(x > 0.0)) return -kInf;
      return p.shape * std::log(p.rate) - std::lgamma(p.shape) - (p.shape + 1.0) * std::log(x) - p.rate / x;
    }
    double operator()(const GigParams& p) const {
      if (!p.valid()) throw ParameterError("logpdf: invalid GIG parameters");
      if (!(x > 0.0)) return -kInf;
      return (p.order - 1.0) * std::log(x) - 0.5 * (p.chi / x + p.psi * x);
    }
    double operator()(const HorseshoePrior&) const {
      if (!(x > 0.0)) return -kInf;
      return -std::log1p(x) - 0.5 * std::log(x);
    }
    double operator()(const LassoPrior&) const {
      if (!(x >= 0.0)) return -kInf;
      return -x;
    }
  };
  return std::visit(Visitor{x}, density);
}

}  // namespace glfuse
