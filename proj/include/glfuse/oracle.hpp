#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "glfuse/model.hpp"
#include "glfuse/rng.hpp"

namespace glfuse {

// Unnormalized log joint density of (y, theta, mu, eta, variances) for the
// variant, with the horseshoe auxiliaries integrated out. Gaussian terms are
// normalized; variance priors use the logpdf kernels (horseshoe, lasso).
// Returns -infinity when any variance is not strictly positive.
double log_joint(const ChainState& s, const SourcePanel& panel, const ModelVariant& variant);

struct TinyInstance {
  SourcePanel panel;
  ModelVariant variant;
};

struct OracleSettings {
  std::size_t n_tune = 20000;    // sweeps of scale adaptation
  std::size_t n_burnin = 5000;   // frozen-scale sweeps discarded
  std::size_t n_iter = 250000;   // sweeps kept
  double target_acceptance = 0.3;
};

// Posterior summaries per sampled coordinate, in natural (not log) scale.
struct OracleSummary {
  std::vector<std::string> names;  // e.g. "mu[2]", "lambda_ij[1,2]", "tau2"
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> mcse;
  std::vector<double> acceptance;  // post-tuning acceptance rate
  std::size_t index_of(const std::string& name) const;
};

// Componentwise random-walk Metropolis on the full joint (log scale for the
// variances). Throws OracleError if any coordinate's post-tuning acceptance
// leaves [0.1, 0.5].
OracleSummary metropolis_posterior(const TinyInstance& instance, const OracleSettings& settings, RngStream& rng);

// E(mu | y, variances) on the theta-collapsed model by solving the joint
// Gaussian system for (mu, eta) directly (long double LU, flat prior on eta;
// areas with a tight mu prior are solved for mu_i - eta instead).
std::vector<double> collapsed_mu_mean(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant);

}  // namespace glfuse
