#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace glfuse {

// Sample quantile by linear interpolation between order statistics
// (h = (n-1)p, the "type 7" rule). `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);
// Sorts a copy; same convention.
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

double mean(std::span<const double> values);
// Unbiased (n-1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);

// Monte Carlo standard error of the mean by non-overlapping batch means with
// floor(sqrt(n)) draws per batch.
double batch_means_mcse(std::span<const double> values);

}  // namespace glfuse
