#include "glfuse/stats.hpp"

#include <algorithm>
#include <cmath>

#include "glfuse/errors.hpp"

namespace glfuse {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double mean(std::span<const double> values) {
  if (values.empty()) throw ParameterError("mean of an empty sample");
  double total = 0.0;
  for (double x : values) total += x;
  return total / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double x : values) ss += (x - m) * (x - m);
  return ss / static_cast<double>(values.size() - 1);
}

double batch_means_mcse(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) throw ParameterError("batch means need at least 4 draws");
  const std::size_t size = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t batches = n / size;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = mean(values.subspan(b * size, size));
  // variance of a batch mean estimates sigma^2 / size; scale to the full run
  return std::sqrt(sample_variance(means) * static_cast<double>(size) / static_cast<double>(batches * size));
}

}  // namespace glfuse
