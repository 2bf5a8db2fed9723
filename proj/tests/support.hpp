#pragma once
// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "glfuse/model.hpp"

namespace testsupport {

// One-sample Kolmogorov-Smirnov distance against a CDF.
inline double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = cdf(x[k]);
    d = std::max({d, f - k / n, (k + 1) / n - f});
  }
  return d;
}

// Asymptotic critical distance, sqrt(-ln(alpha/2)/2) / sqrt(n).
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

// GIG(order, chi, psi) mean through modified Bessel functions of the second kind
// (K is even in its order).
inline double gig_mean(double order, double chi, double psi) {
  const double w = std::sqrt(chi * psi);
  return std::sqrt(chi / psi) * std::cyl_bessel_k(std::abs(order + 1.0), w) / std::cyl_bessel_k(std::abs(order), w);
}

// Normalized GIG CDF: the kernel x^(order-1) exp(-(chi/x + psi x)/2) integrated
// piecewise on a fine geometric grid, then interpolated. Needs chi > 0.
class GigCdf {
 public:
  GigCdf(double order, double chi, double psi) {
    const double m = gig_mean(order, chi, psi);
    const double lo = std::min(m, chi) * 1e-6, hi = 80.0 * m + 80.0 / psi;
    auto f = [&](double x) { return std::exp((order - 1.0) * std::log(x) - 0.5 * (chi / x + psi * x)); };
    const std::size_t n = 20000;
    grid_.resize(n);
    cum_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) grid_[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    for (std::size_t k = 1; k < n; ++k) {
      cum_[k] = cum_[k - 1] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, grid_[k - 1], grid_[k], 0);
    }
    for (auto& c : cum_) c /= cum_.back();
  }
  double operator()(double x) const {
    if (x <= grid_.front()) return 0.0;
    if (x >= grid_.back()) return 1.0;
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - grid_.begin());
    const double t = std::log(x / grid_[k - 1]) / std::log(grid_[k] / grid_[k - 1]);
    return cum_[k - 1] + t * (cum_[k] - cum_[k - 1]);
  }

 private:
  std::vector<double> grid_, cum_;
};

inline glfuse::SourcePanel make_panel(const std::vector<std::vector<double>>& y,
                                      const std::vector<std::vector<double>>& v) {
  glfuse::SourcePanel p;
  p.y = glfuse::Matrix(y.size(), y.front().size());
  p.v = glfuse::Matrix(y.size(), y.front().size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    p.areas.push_back("a" + std::to_string(i + 1));
    for (std::size_t j = 0; j < y[i].size(); ++j) {
      p.y(i, j) = y[i][j];
      p.v(i, j) = v[i][j];
    }
  }
  for (std::size_t j = 0; j < y.front().size(); ++j) p.sources.push_back("s" + std::to_string(j + 1));
  return p;
}

}  // namespace testsupport
