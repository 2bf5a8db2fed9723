#pragma once

#include <string>
#include <vector>

#include "glfuse/gibbs.hpp"

namespace glfuse {

inline constexpr double kDefaultRhatThreshold = 1.05;

// Split-R-hat of one scalar: every chain is cut in half (odd lengths drop the
// last draw) and the classic between/within ratio is taken over the 2m halves.
// Needs >= 2 chains of equal length >= 4. Constant input gives 1; zero
// within-half variance with differing halves gives +infinity.
double split_rhat(const std::vector<std::vector<double>>& chains);

struct RhatReport {
  std::vector<std::string> parameters;
  std::vector<double> values;
  double threshold = kDefaultRhatThreshold;
  bool pass() const;
};

// R-hat of every mu_i (and eta when it was monitored).
RhatReport rhat_report(const DrawStore& store, double threshold = kDefaultRhatThreshold);

}  // namespace glfuse
