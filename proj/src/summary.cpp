#include "glfuse/summary.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "glfuse/errors.hpp"
#include "glfuse/stats.hpp"

namespace glfuse {

namespace {

double marginal_variance(const ChainState& s, const SourcePanel& panel, const ModelVariant& variant, std::size_t i,
                         std::size_t j) {
  if (!variant.has_theta()) return panel.v(i, j);
  return panel.v(i, j) + theta_prior_variance(s, variant.theta_form, i, j);
}

}  // namespace

std::vector<double> ShrinkageDecomposition::conditional_mean() const {
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] * ybar[i] + (1.0 - phi[i]) * ybar_w;
  return out;
}

ShrinkageDecomposition decompose(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant) {
  const std::size_t I = panel.n_areas(), J = panel.n_sources();
  ShrinkageDecomposition d;
  d.A.resize(I);
  d.s2 = Matrix(I, J);
  d.h2.resize(I);
  d.phi.resize(I);
  d.ybar.resize(I);
  double wsum = 0.0, wy = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    d.A[i] = mu_prior_variance(draw, i);
    double prec = 0.0, py = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double s2 = marginal_variance(draw, panel, variant, i, j);
      d.s2(i, j) = s2;
      prec += 1.0 / s2;
      py += panel.y(i, j) / s2;
    }
    d.h2[i] = 1.0 / prec;
    d.ybar[i] = py / prec;
    d.phi[i] = d.A[i] / (d.A[i] + d.h2[i]);
    const double w = 1.0 / (d.A[i] + d.h2[i]);
    wsum += w;
    wy += w * d.ybar[i];
  }
  d.ybar_w = wy / wsum;
  return d;
}

void shrinkage_factors(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant, double* out) {
  for (std::size_t i = 0; i < panel.n_areas(); ++i) {
    double prec = 0.0;
    for (std::size_t j = 0; j < panel.n_sources(); ++j) prec += 1.0 / marginal_variance(draw, panel, variant, i, j);
    const double A = mu_prior_variance(draw, i);
    out[i] = A / (A + 1.0 / prec);
  }
}

Matrix kappa_weights(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant) {
  if (variant.theta_form != ThetaForm::SourceOnly) {
    throw ParameterError(fmt::format("kappa weights are defined for m1a and m1b, not {}", to_string(variant.tag)));
  }
  Matrix k(panel.n_areas(), panel.n_sources());
  for (std::size_t i = 0; i < k.rows(); ++i) {
    for (std::size_t j = 0; j < k.cols(); ++j) {
      const double v = panel.v(i, j);
      k(i, j) = v / (v + draw.lambda_ij(i, j) * draw.tau1_sq);
    }
  }
  return k;
}

IntervalSummary summarize_draws(std::vector<double> draws, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError(fmt::format("level must be in (0, 1), got {}", level));
  if (draws.empty()) throw ParameterError("summarize: no draws");
  IntervalSummary out;
  out.mean = mean(draws);
  out.sd = std::sqrt(sample_variance(draws));
  std::sort(draws.begin(), draws.end());
  const double alpha = 1.0 - level;
  out.lower = quantile_sorted(draws, alpha / 2.0);
  out.upper = quantile_sorted(draws, 1.0 - alpha / 2.0);
  return out;
}

std::vector<IntervalSummary> summarize(const DrawStore& store, double level) {
  if (!store.settings.monitor.mu) throw MissingQuantityError("mu was not monitored");
  if (store.total_kept() == 0) throw ParameterError("summarize: empty draw store");
  std::vector<IntervalSummary> out;
  out.reserve(store.n_areas);
  for (std::size_t i = 0; i < store.n_areas; ++i) out.push_back(summarize_draws(store.pooled_mu(i), level));
  return out;
}

FiveNumber five_number(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75),
          values.back()};
}

std::vector<FiveNumber> phi_distribution(const DrawStore& store) {
  if (!store.settings.monitor.phi) throw MissingQuantityError("phi was not monitored; enable monitor.phi");
  if (store.total_kept() == 0) throw ParameterError("phi_distribution: empty draw store");
  std::vector<FiveNumber> out;
  for (std::size_t i = 0; i < store.n_areas; ++i) out.push_back(five_number(store.pooled_phi(i)));
  return out;
}

Matrix kappa_posterior_mean(const DrawStore& store, const SourcePanel& panel) {
  if (!store.settings.monitor.variances) throw MissingQuantityError("variances were not monitored");
  if (store.variant.theta_form != ThetaForm::SourceOnly) {
    throw ParameterError(fmt::format("kappa weights are defined for m1a and m1b, not {}", to_string(store.variant.tag)));
  }
  const std::size_t I = store.n_areas, J = store.n_sources;
  Matrix total(I, J);
  std::size_t n = 0;
  for (const auto& c : store.chains) {
    for (std::size_t k = 0; k < c.kept; ++k) {
      const double* row = c.variances.data() + k * store.variance_width;
      const double tau1 = row[I * J + I];
      for (std::size_t i = 0; i < I; ++i) {
        for (std::size_t j = 0; j < J; ++j) {
          const double v = panel.v(i, j);
          total(i, j) += v / (v + row[i * J + j] * tau1);
        }
      }
      ++n;
    }
  }
  if (n == 0) throw ParameterError("kappa_posterior_mean: empty draw store");
  for (double& x : total.values()) x /= static_cast<double>(n);
  return total;
}

}  // namespace glfuse
