#include "glfuse/gibbs.hpp"

#include <cmath>

#include <fmt/core.h>

#include "glfuse/errors.hpp"
#include "glfuse/parallel.hpp"
#include "glfuse/summary.hpp"

namespace glfuse {

// ---- conditionals -----------------------------------------------------------

NormalParams theta_conditional(double y, double v, double mu, double a) {
  if (!(a > 0.0)) throw SamplerError(fmt::format("theta prior variance must be > 0, got {}", a));
  const double var = 1.0 / (1.0 / v + 1.0 / a);
  return {(y / v + mu / a) * var, var};
}

NormalParams mu_conditional(const ChainState& s, const SourcePanel& panel, const ModelVariant& variant,
                            std::size_t i) {
  double c = 0.0, weighted = 0.0;
  if (variant.has_theta()) {
    for (std::size_t j = 0; j < s.theta.cols(); ++j) {
      const double a = theta_prior_variance(s, variant.theta_form, i, j);
      c += 1.0 / a;
      weighted += s.theta(i, j) / a;
    }
  } else {
    c = 1.0 / panel.v(i, 0);
    weighted = panel.y(i, 0) * c;
  }
  const double d = 1.0 / mu_prior_variance(s, i);
  const double var = 1.0 / (c + d);
  return {(weighted + s.eta * d) * var, var};
}

NormalParams eta_conditional(const ChainState& s) {
  double sum_d = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    const double d = 1.0 / mu_prior_variance(s, i);
    sum_d += d;
    weighted += d * s.mu[i];
  }
  return {weighted / sum_d, 1.0 / sum_d};
}

namespace {

double sq(double x) { return x * x; }

// sum_j (theta_ij - mu_i)^2 / lambda_ij  (product form, lambda_i excluded)
double area_theta_ss(const ChainState& s, std::size_t i) {
  double ss = 0.0;
  for (std::size_t j = 0; j < s.theta.cols(); ++j) ss += sq(s.theta(i, j) - s.mu[i]) / s.lambda_ij(i, j);
  return ss;
}

double guard_chi(double chi, double order) { return (chi == 0.0 && order <= 0.0) ? kLassoChiFloor : chi; }

}  // namespace

InverseGammaParams horseshoe_lambda_ij_conditional(const ChainState& s, const ModelVariant& variant,
                                                   std::size_t i, std::size_t j) {
  const double scale = variant.theta_form == ThetaForm::Product ? s.lambda_i[i] * s.tau1_sq : s.tau1_sq;
  return {1.0, sq(s.theta(i, j) - s.mu[i]) / (2.0 * scale) + 1.0 / s.xi_ij(i, j)};
}

InverseGammaParams horseshoe_lambda_i_conditional(const ChainState& s, const ModelVariant& variant,
                                                  std::size_t i) {
  const double mu_term = sq(s.mu[i] - s.eta) / (2.0 * s.tau2_sq) + 1.0 / s.xi_i[i];
  if (variant.theta_form == ThetaForm::Product) {
    const double J = static_cast<double>(s.theta.cols());
    return {(J + 4.0) / 2.0 - 1.0, area_theta_ss(s, i) / (2.0 * s.tau1_sq) + mu_term};
  }
  return {1.0, mu_term};
}

GigParams lasso_lambda_ij_conditional(const ChainState& s, const ModelVariant& variant, std::size_t i,
                                      std::size_t j) {
  const double scale = variant.theta_form == ThetaForm::Product ? s.lambda_i[i] * s.tau1_sq : s.tau1_sq;
  const double order = 0.5;
  return {order, guard_chi(sq(s.theta(i, j) - s.mu[i]) / scale, order), 2.0};
}

GigParams lasso_lambda_i_conditional(const ChainState& s, const ModelVariant& variant, std::size_t i) {
  const double mu_chi = sq(s.mu[i] - s.eta) / s.tau2_sq;
  if (variant.theta_form == ThetaForm::Product) {
    const double J = static_cast<double>(s.theta.cols());
    const double order = (1.0 - J) / 2.0;
    return {order, guard_chi(area_theta_ss(s, i) / s.tau1_sq + mu_chi, order), 2.0};
  }
  return {0.5, guard_chi(mu_chi, 0.5), 2.0};
}

InverseGammaParams tau1_conditional(const ChainState& s, const ModelVariant& variant) {
  const std::size_t I = s.theta.rows(), J = s.theta.cols();
  double ss = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      double scale = 1.0;
      if (variant.theta_form == ThetaForm::Product) scale = s.lambda_ij(i, j) * s.lambda_i[i];
      else if (variant.theta_form == ThetaForm::SourceOnly) scale = s.lambda_ij(i, j);
      ss += sq(s.theta(i, j) - s.mu[i]) / scale;
    }
  }
  const double n = static_cast<double>(I * J);
  return {(n + 3.0) / 2.0 - 1.0, ss / 2.0 + 1.0 / s.xi_tau1};
}

InverseGammaParams tau2_conditional(const ChainState& s) {
  double ss = 0.0;
  for (std::size_t i = 0; i < s.mu.size(); ++i) ss += sq(s.mu[i] - s.eta) / s.lambda_i[i];
  const double n = static_cast<double>(s.mu.size());
  return {(n + 3.0) / 2.0 - 1.0, ss / 2.0 + 1.0 / s.xi_tau2};
}

InverseGammaParams aux_conditional(double variance) { return {1.0, 1.0 + 1.0 / variance}; }

// ---- updates ----------------------------------------------------------------

void update_theta(ChainState& s, const SourcePanel& panel, const ModelVariant& variant, RngStream& rng) {
  if (!variant.has_theta()) return;
  for (std::size_t i = 0; i < s.theta.rows(); ++i) {
    for (std::size_t j = 0; j < s.theta.cols(); ++j) {
      const auto p = theta_conditional(panel.y(i, j), panel.v(i, j), s.mu[i],
                                       theta_prior_variance(s, variant.theta_form, i, j));
      s.theta(i, j) = sample_normal(p.mean, p.variance, rng);
    }
  }
}

void update_mu(ChainState& s, const SourcePanel& panel, const ModelVariant& variant, RngStream& rng) {
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    const auto p = mu_conditional(s, panel, variant, i);
    s.mu[i] = sample_normal(p.mean, p.variance, rng);
  }
}

void update_eta(ChainState& s, RngStream& rng) {
  const auto p = eta_conditional(s);
  s.eta = sample_normal(p.mean, p.variance, rng);
}

void update_local_variances_horseshoe(ChainState& s, const ModelVariant& variant, RngStream& rng) {
  if (variant.local_prior != LocalPrior::Horseshoe) return;
  if (variant.free_lambda_ij()) {
    for (std::size_t i = 0; i < s.theta.rows(); ++i) {
      for (std::size_t j = 0; j < s.theta.cols(); ++j) {
        s.lambda_ij(i, j) = sample_inverse_gamma(horseshoe_lambda_ij_conditional(s, variant, i, j), rng);
        s.xi_ij(i, j) = sample_inverse_gamma(aux_conditional(s.lambda_ij(i, j)), rng);
      }
    }
  }
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    s.lambda_i[i] = sample_inverse_gamma(horseshoe_lambda_i_conditional(s, variant, i), rng);
    s.xi_i[i] = sample_inverse_gamma(aux_conditional(s.lambda_i[i]), rng);
  }
}

void update_local_variances_lasso(ChainState& s, const ModelVariant& variant, RngStream& rng) {
  if (variant.local_prior != LocalPrior::Lasso) return;
  for (std::size_t i = 0; i < s.theta.rows(); ++i) {
    for (std::size_t j = 0; j < s.theta.cols(); ++j) {
      s.lambda_ij(i, j) = sample_gig(lasso_lambda_ij_conditional(s, variant, i, j), rng);
    }
  }
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    s.lambda_i[i] = sample_gig(lasso_lambda_i_conditional(s, variant, i), rng);
  }
}

void update_global_variances(ChainState& s, const ModelVariant& variant, RngStream& rng) {
  if (variant.has_theta()) {
    s.tau1_sq = sample_inverse_gamma(tau1_conditional(s, variant), rng);
    s.xi_tau1 = sample_inverse_gamma(aux_conditional(s.tau1_sq), rng);
  }
  s.tau2_sq = sample_inverse_gamma(tau2_conditional(s), rng);
  s.xi_tau2 = sample_inverse_gamma(aux_conditional(s.tau2_sq), rng);
}

void gibbs_sweep(ChainState& s, const SourcePanel& panel, const ModelVariant& variant, RngStream& rng,
                 bool pin_local_variances) {
  update_theta(s, panel, variant, rng);
  update_mu(s, panel, variant, rng);
  update_eta(s, rng);
  if (!pin_local_variances) {
    update_local_variances_horseshoe(s, variant, rng);
    update_local_variances_lasso(s, variant, rng);
  }
  update_global_variances(s, variant, rng);
}

void check_state(const ChainState& s, std::size_t iteration) {
  auto fail = [&](const std::string& what) {
    throw SamplerError(fmt::format("iteration {}: non-finite or invalid {}", iteration, what));
  };
  for (std::size_t i = 0; i < s.theta.rows(); ++i) {
    for (std::size_t j = 0; j < s.theta.cols(); ++j) {
      if (!std::isfinite(s.theta(i, j))) fail(fmt::format("theta({},{})", i + 1, j + 1));
      const double l = s.lambda_ij(i, j);
      if (!std::isfinite(l) || !(l > 0.0)) fail(fmt::format("lambda_ij({},{})", i + 1, j + 1));
    }
  }
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    if (!std::isfinite(s.mu[i])) fail(fmt::format("mu({})", i + 1));
    if (!std::isfinite(s.lambda_i[i]) || !(s.lambda_i[i] > 0.0)) fail(fmt::format("lambda_i({})", i + 1));
  }
  if (!std::isfinite(s.eta)) fail("eta");
  if (!std::isfinite(s.tau1_sq) || !(s.tau1_sq > 0.0)) fail("tau1_sq");
  if (!std::isfinite(s.tau2_sq) || !(s.tau2_sq > 0.0)) fail("tau2_sq");
}

// ---- draw store -------------------------------------------------------------

namespace {

std::vector<double> column(const std::vector<double>& rows, std::size_t width, std::size_t k) {
  std::vector<double> out;
  if (width == 0) return out;
  out.reserve(rows.size() / width);
  for (std::size_t r = k; r < rows.size(); r += width) out.push_back(rows[r]);
  return out;
}

}  // namespace

std::vector<std::vector<double>> DrawStore::mu_chains(std::size_t i) const {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) out.push_back(column(c.mu, n_areas, i));
  return out;
}

std::vector<std::vector<double>> DrawStore::phi_chains(std::size_t i) const {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) out.push_back(column(c.phi, n_areas, i));
  return out;
}

std::vector<std::vector<double>> DrawStore::eta_chains() const {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) out.push_back(c.eta);
  return out;
}

std::vector<double> DrawStore::pooled_mu(std::size_t i) const {
  std::vector<double> out;
  for (const auto& c : chains) {
    auto col = column(c.mu, n_areas, i);
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

std::vector<double> DrawStore::pooled_phi(std::size_t i) const {
  std::vector<double> out;
  for (const auto& c : chains) {
    auto col = column(c.phi, n_areas, i);
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

std::size_t DrawStore::total_kept() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.kept;
  return n;
}

// ---- chain runner -----------------------------------------------------------

ChainRunner::ChainRunner(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
                         std::uint64_t stream_id)
    : panel_(&panel), variant_(variant), settings_(settings), rng_(settings.seed, stream_id) {
  settings_.validate();
  require_valid(panel, variant);
  state_ = init_state(panel, variant, settings_.init_overdispersion, rng_);
}

ChainRunner::ChainRunner(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
                         const RngStream& rng, ChainState state, std::size_t iteration, ChainDraws draws)
    : panel_(&panel),
      variant_(variant),
      settings_(settings),
      rng_(rng),
      state_(std::move(state)),
      iteration_(iteration),
      draws_(std::move(draws)) {}

void ChainRunner::record() {
  const auto& m = settings_.monitor;
  const std::size_t I = panel_->n_areas();
  ++draws_.kept;
  if (m.mu) draws_.mu.insert(draws_.mu.end(), state_.mu.begin(), state_.mu.end());
  if (m.theta && variant_.has_theta()) {
    draws_.theta.insert(draws_.theta.end(), state_.theta.values().begin(), state_.theta.values().end());
  }
  if (m.phi) {
    const std::size_t at = draws_.phi.size();
    draws_.phi.resize(at + I);
    shrinkage_factors(state_, *panel_, variant_, draws_.phi.data() + at);
  }
  if (m.variances) pack_variances(state_, draws_.variances);
  if (m.eta) draws_.eta.push_back(state_.eta);
}

void ChainRunner::advance(std::size_t sweeps) {
  const bool pin = settings_.pin_local_variances;
  for (std::size_t k = 0; k < sweeps && iteration_ < settings_.n_iter; ++k) {
    gibbs_sweep(state_, *panel_, variant_, rng_, pin);
    check_state(state_, iteration_ + 1);
    ++iteration_;
    if (iteration_ > settings_.n_burnin && (iteration_ - settings_.n_burnin) % settings_.thin == 0) record();
  }
}

ChainDraws run_chain(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
                     std::uint64_t stream_id) {
  ChainRunner runner(panel, variant, settings, stream_id);
  runner.run();
  return runner.take_draws();
}

std::uint64_t StreamBase::chain_stream(ModelTag tag, std::size_t chain) const {
  return stream_key(domain, case_id, row, replicate, static_cast<std::uint32_t>(tag) + 16 * salt,
                    static_cast<std::uint32_t>(chain));
}

DrawStore run_chains(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
                     const StreamBase& streams, unsigned workers) {
  settings.validate();
  require_valid(panel, variant);
  DrawStore store;
  store.variant = variant;
  store.settings = settings;
  store.n_areas = panel.n_areas();
  store.n_sources = panel.n_sources();
  {
    RngStream dummy(0, 0);
    store.variance_width = variance_width(init_state(panel, variant, 0.0, dummy));
  }
  store.chains.resize(settings.n_chains);
  parallel_for(settings.n_chains, workers == 0 ? default_workers() : workers, [&](std::size_t c) {
    try {
      store.chains[c] = run_chain(panel, variant, settings, streams.chain_stream(variant.tag, c));
    } catch (const SamplerError& e) {
      throw SamplerError(fmt::format("chain {}: {}", c + 1, e.what()));
    }
  });
  return store;
}

}  // namespace glfuse
