#pragma once

#include <vector>

#include "glfuse/gibbs.hpp"
#include "glfuse/matrix.hpp"
#include "glfuse/model.hpp"

namespace glfuse {

// Conditional shrinkage structure of mu given the data and one draw of the
// variances. Naming: s2 is the marginal variance V_ij + a_ij of y_ij given
// mu_i, h2_i = (sum_j 1/s2_ij)^-1, A_i = lambda_i * tau2.
struct ShrinkageDecomposition {
  std::vector<double> A;
  Matrix s2;
  std::vector<double> h2;
  std::vector<double> phi;   // A / (A + h2)
  std::vector<double> ybar;  // precision-weighted source mean per area
  double ybar_w = 0.0;       // cross-area weighted mean of ybar

  // phi_i * ybar_i + (1 - phi_i) * ybar_w
  std::vector<double> conditional_mean() const;
};

ShrinkageDecomposition decompose(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant);

// phi only, written to out[0..I); no allocation.
void shrinkage_factors(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant, double* out);

// kappa_ij = V_ij / (V_ij + lambda_ij * tau1). Defined for m1a and m1b only.
Matrix kappa_weights(const ChainState& draw, const SourcePanel& panel, const ModelVariant& variant);

struct IntervalSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Equal-tailed interval from linear-interpolation quantiles.
IntervalSummary summarize_draws(std::vector<double> draws, double level);
// Per-area summary of mu pooled over chains.
std::vector<IntervalSummary> summarize(const DrawStore& store, double level);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};
FiveNumber five_number(std::vector<double> values);

// Per-area quartiles of the phi draws; MissingQuantityError if phi was not monitored.
std::vector<FiveNumber> phi_distribution(const DrawStore& store);

// Posterior mean of kappa_ij; needs monitored variances and an m1a/m1b store.
Matrix kappa_posterior_mean(const DrawStore& store, const SourcePanel& panel);

}  // namespace glfuse
