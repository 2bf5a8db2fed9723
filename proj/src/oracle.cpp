#include "glfuse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "glfuse/distributions.hpp"
#include "glfuse/errors.hpp"
#include "glfuse/stats.hpp"

namespace glfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double local_prior_logpdf(LocalPrior prior, double v) {
  return prior == LocalPrior::Lasso ? logpdf(LassoPrior{}, v) : logpdf(HorseshoePrior{}, v);
}

}  // namespace

double log_joint(const ChainState& s, const SourcePanel& panel, const ModelVariant& variant) {
  const std::size_t I = panel.n_areas(), J = panel.n_sources();
  for (double v : s.lambda_i)
    if (!(v > 0.0)) return kNegInf;
  if (!(s.tau2_sq > 0.0)) return kNegInf;
  if (variant.has_theta()) {
    for (double v : s.lambda_ij.values())
      if (!(v > 0.0)) return kNegInf;
    if (!(s.tau1_sq > 0.0)) return kNegInf;
  }

  double lp = 0.0;
  if (variant.has_theta()) {
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        double a = s.tau1_sq;
        if (variant.theta_form == ThetaForm::Product) a *= s.lambda_ij(i, j) * s.lambda_i[i];
        if (variant.theta_form == ThetaForm::SourceOnly) a *= s.lambda_ij(i, j);
        lp += logpdf(NormalParams{s.theta(i, j), panel.v(i, j)}, panel.y(i, j));
        lp += logpdf(NormalParams{s.mu[i], a}, s.theta(i, j));
      }
    }
  } else {
    for (std::size_t i = 0; i < I; ++i) lp += logpdf(NormalParams{s.mu[i], panel.v(i, 0)}, panel.y(i, 0));
  }
  for (std::size_t i = 0; i < I; ++i) lp += logpdf(NormalParams{s.eta, s.lambda_i[i] * s.tau2_sq}, s.mu[i]);

  if (variant.free_lambda_ij()) {
    for (double v : s.lambda_ij.values()) lp += local_prior_logpdf(variant.local_prior, v);
  }
  if (variant.free_lambda_i()) {
    for (double v : s.lambda_i) lp += local_prior_logpdf(variant.local_prior, v);
  }
  if (variant.has_theta()) lp += logpdf(HorseshoePrior{}, s.tau1_sq);
  lp += logpdf(HorseshoePrior{}, s.tau2_sq);
  return lp;
}

std::size_t OracleSummary::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ParameterError(fmt::format("oracle summary has no coordinate '{}'", name));
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

enum class Kind { Theta, Mu, Eta, LambdaIJ, LambdaI, Tau1, Tau2 };

struct Coord {
  Kind kind;
  std::size_t i = 0;
  std::size_t j = 0;
  bool log_scale() const { return kind != Kind::Theta && kind != Kind::Mu && kind != Kind::Eta; }
};

double& slot(ChainState& s, const Coord& c) {
  switch (c.kind) {
    case Kind::Theta: return s.theta(c.i, c.j);
    case Kind::Mu: return s.mu[c.i];
    case Kind::Eta: return s.eta;
    case Kind::LambdaIJ: return s.lambda_ij(c.i, c.j);
    case Kind::LambdaI: return s.lambda_i[c.i];
    case Kind::Tau1: return s.tau1_sq;
    case Kind::Tau2: return s.tau2_sq;
  }
  return s.eta;
}

std::string coord_name(const Coord& c) {
  switch (c.kind) {
    case Kind::Theta: return fmt::format("theta[{},{}]", c.i + 1, c.j + 1);
    case Kind::Mu: return fmt::format("mu[{}]", c.i + 1);
    case Kind::Eta: return "eta";
    case Kind::LambdaIJ: return fmt::format("lambda_ij[{},{}]", c.i + 1, c.j + 1);
    case Kind::LambdaI: return fmt::format("lambda_i[{}]", c.i + 1);
    case Kind::Tau1: return "tau1";
    case Kind::Tau2: return "tau2";
  }
  return "?";
}

std::vector<Coord> coordinates(const SourcePanel& panel, const ModelVariant& variant) {
  const std::size_t I = panel.n_areas(), J = panel.n_sources();
  std::vector<Coord> out;
  if (variant.has_theta()) {
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t j = 0; j < J; ++j) out.push_back({Kind::Theta, i, j});
  }
  for (std::size_t i = 0; i < I; ++i) out.push_back({Kind::Mu, i});
  out.push_back({Kind::Eta});
  if (variant.free_lambda_ij()) {
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t j = 0; j < J; ++j) out.push_back({Kind::LambdaIJ, i, j});
  }
  if (variant.free_lambda_i()) {
    for (std::size_t i = 0; i < I; ++i) out.push_back({Kind::LambdaI, i});
  }
  if (variant.has_theta()) out.push_back({Kind::Tau1});
  out.push_back({Kind::Tau2});
  return out;
}

}  // namespace

OracleSummary metropolis_posterior(const TinyInstance& instance, const OracleSettings& settings, RngStream& rng) {
  const auto& panel = instance.panel;
  const auto& variant = instance.variant;
  require_valid(panel, variant);
  if (panel.n_areas() > 4 || panel.n_sources() > 2) throw ParameterError("oracle instances are limited to I <= 4, J <= 2");
  if (settings.n_iter < 16) throw ParameterError("oracle needs at least 16 iterations");

  RngStream init_rng(0, 0);
  ChainState s = init_state(panel, variant, 0.0, init_rng);
  const auto coords = coordinates(panel, variant);
  const std::size_t D = coords.size();

  // proposal sd per coordinate, in the transformed scale
  std::vector<double> scale(D);
  for (std::size_t k = 0; k < D; ++k) scale[k] = coords[k].log_scale() ? 1.0 : 0.05;

  double current = log_joint(s, panel, variant);
  std::vector<std::size_t> accepted(D, 0);

  auto sweep = [&]() {
    for (std::size_t k = 0; k < D; ++k) {
      double& x = slot(s, coords[k]);
      const double old = x;
      const double step = scale[k] * sample_std_normal(rng);
      double log_ratio;
      if (coords[k].log_scale()) {
        x = old * std::exp(step);
        // Jacobian of v = exp(u): log v' - log v = step
        log_ratio = step;
      } else {
        x = old + step;
        log_ratio = 0.0;
      }
      const double proposed = log_joint(s, panel, variant);
      log_ratio += proposed - current;
      if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
        current = proposed;
        ++accepted[k];
      } else {
        x = old;
      }
    }
  };

  // adaptation: batches of 50 sweeps, shrinking step in log(scale)
  constexpr std::size_t kBatch = 50;
  std::size_t batch_no = 0;
  for (std::size_t t = 0; t < settings.n_tune; ++t) {
    sweep();
    if ((t + 1) % kBatch == 0) {
      ++batch_no;
      const double delta = std::max(0.02, 1.0 / std::sqrt(static_cast<double>(batch_no)));
      for (std::size_t k = 0; k < D; ++k) {
        const double rate = static_cast<double>(accepted[k]) / kBatch;
        scale[k] *= std::exp(rate > settings.target_acceptance ? delta : -delta);
        accepted[k] = 0;
      }
    }
  }
  std::fill(accepted.begin(), accepted.end(), 0);
  for (std::size_t t = 0; t < settings.n_burnin; ++t) sweep();
  std::fill(accepted.begin(), accepted.end(), 0);

  const std::size_t bsize = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(settings.n_iter))));
  const std::size_t nbatch = settings.n_iter / bsize;
  const std::size_t n = nbatch * bsize;
  std::vector<double> sum(D, 0.0), sum_sq(D, 0.0), batch_sum(D, 0.0);
  std::vector<std::vector<double>> batch_means(D);
  for (std::size_t t = 0; t < n; ++t) {
    sweep();
    for (std::size_t k = 0; k < D; ++k) {
      const double x = slot(s, coords[k]);
      sum[k] += x;
      sum_sq[k] += x * x;
      batch_sum[k] += x;
    }
    if ((t + 1) % bsize == 0) {
      for (std::size_t k = 0; k < D; ++k) {
        batch_means[k].push_back(batch_sum[k] / static_cast<double>(bsize));
        batch_sum[k] = 0.0;
      }
    }
  }

  OracleSummary out;
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < D; ++k) {
    out.names.push_back(coord_name(coords[k]));
    const double m = sum[k] / nd;
    out.mean.push_back(m);
    out.variance.push_back(std::max(0.0, sum_sq[k] / nd - m * m) * nd / (nd - 1.0));
    out.mcse.push_back(std::sqrt(sample_variance(batch_means[k]) / static_cast<double>(nbatch)));
    out.acceptance.push_back(static_cast<double>(accepted[k]) / nd);
  }
  for (std::size_t k = 0; k < D; ++k) {
    if (out.acceptance[k] < 0.1 || out.acceptance[k] > 0.5) {
      throw OracleError(fmt::format("oracle acceptance for {} is {:.3f}, outside [0.1, 0.5]", out.names[k],
                                    out.acceptance[k]));
    }
  }
  return out;
}

std::vector<double> collapsed_mu_mean(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant) {
  using Real = long double;
  const std::size_t I = panel.n_areas(), J = panel.n_sources();
  const std::size_t n = I + 1;
  std::vector<Real> q(n * n, 0.0L), b(n, 0.0L);
  auto Q = [&](std::size_t r, std::size_t c) -> Real& { return q[r * n + c]; };

  // Area i enters either as mu_i (centered) or as u_i = mu_i - eta. The
  // centered form is badly conditioned once 1/A_i dwarfs the data precision
  // (horseshoe lambda_i * tau2 can reach 1e-15), so such areas go non-centered.
  std::vector<bool> offset(I, false);
  for (std::size_t i = 0; i < I; ++i) {
    const Real A = static_cast<Real>(draw.lambda_i[i]) * static_cast<Real>(draw.tau2_sq);
    Real p = 0.0L, py = 0.0L;
    for (std::size_t j = 0; j < J; ++j) {
      // marginal variance of y_ij given mu_i after integrating theta_ij
      Real var = panel.v(i, j);
      if (variant.theta_form == ThetaForm::Product) {
        var += static_cast<Real>(draw.lambda_ij(i, j)) * draw.lambda_i[i] * draw.tau1_sq;
      } else if (variant.theta_form == ThetaForm::SourceOnly) {
        var += static_cast<Real>(draw.lambda_ij(i, j)) * draw.tau1_sq;
      } else if (variant.theta_form == ThetaForm::Unit) {
        var += draw.tau1_sq;
      }
      p += 1.0L / var;
      py += panel.y(i, j) / var;
    }
    Q(i, i) += p + 1.0L / A;
    b[i] += py;
    if (1.0L / A > p) {
      offset[i] = true;
      Q(i, I) += p;
      Q(I, i) += p;
      Q(I, I) += p;
      b[I] += py;
    } else {
      Q(i, I) -= 1.0L / A;
      Q(I, i) -= 1.0L / A;
      Q(I, I) += 1.0L / A;
    }
  }

  // Gaussian elimination with partial pivoting
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(Q(r, col)) > std::fabs(Q(piv, col))) piv = r;
    if (Q(piv, col) == 0.0L) throw ParameterError("collapsed_mu_mean: singular precision matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(Q(col, c), Q(piv, c));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const Real f = Q(r, col) / Q(col, col);
      if (f == 0.0L) continue;
      for (std::size_t c = col; c < n; ++c) Q(r, c) -= f * Q(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<Real> x(n);
  for (std::size_t r = n; r-- > 0;) {
    Real acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= Q(r, c) * x[c];
    x[r] = acc / Q(r, r);
  }
  std::vector<double> mu(I);
  for (std::size_t i = 0; i < I; ++i) mu[i] = static_cast<double>(offset[i] ? x[i] + x[I] : x[i]);
  return mu;
}

}  // namespace glfuse
