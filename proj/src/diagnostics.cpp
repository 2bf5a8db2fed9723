#include "glfuse/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "glfuse/errors.hpp"
#include "glfuse/stats.hpp"

namespace glfuse {

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw ParameterError("split_rhat needs at least 2 chains");
  const std::size_t len = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != len) throw ParameterError("split_rhat: chains differ in length");
  }
  if (len < 4) throw ParameterError("split_rhat needs at least 4 draws per chain");

  const std::size_t n = len / 2;
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    for (std::size_t h = 0; h < 2; ++h) {
      std::span<const double> half(c.data() + h * n, n);
      means.push_back(mean(half));
      vars.push_back(sample_variance(half));
    }
  }
  const double W = mean(vars);
  const double B = static_cast<double>(n) * sample_variance(means);
  if (W == 0.0) return B == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * W + B / nd;
  return std::sqrt(var_plus / W);
}

bool RhatReport::pass() const {
  for (double v : values) {
    if (!(v < threshold)) return false;
  }
  return true;
}

RhatReport rhat_report(const DrawStore& store, double threshold) {
  if (!store.settings.monitor.mu) throw MissingQuantityError("mu was not monitored");
  RhatReport report;
  report.threshold = threshold;
  for (std::size_t i = 0; i < store.n_areas; ++i) {
    report.parameters.push_back(fmt::format("mu[{}]", i + 1));
    report.values.push_back(split_rhat(store.mu_chains(i)));
  }
  if (store.settings.monitor.eta) {
    report.parameters.push_back("eta");
    report.values.push_back(split_rhat(store.eta_chains()));
  }
  return report;
}

}  // namespace glfuse
