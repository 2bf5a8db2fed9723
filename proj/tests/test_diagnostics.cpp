#include <doctest.h>

#include <cmath>
#include <vector>

#include "glfuse/diagnostics.hpp"
#include "glfuse/distributions.hpp"
#include "glfuse/errors.hpp"

using namespace glfuse;

namespace {

// Straight transcription of split R-hat, kept separate from the library.
double reference_rhat(const std::vector<std::vector<double>>& chains) {
  const std::size_t n = chains[0].size() / 2;
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    halves.emplace_back(c.begin(), c.begin() + static_cast<long>(n));
    halves.emplace_back(c.begin() + static_cast<long>(n), c.begin() + static_cast<long>(2 * n));
  }
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double W = 0.0;
  for (const auto& h : halves) {
    double s = 0.0;
    for (double x : h) s += x;
    const double mean = s / n;
    means.push_back(mean);
    double ss = 0.0;
    for (double x : h) ss += (x - mean) * (x - mean);
    W += ss / (n - 1.0) / m;
  }
  double grand = 0.0;
  for (double x : means) grand += x / m;
  double B = 0.0;
  for (double x : means) B += (x - grand) * (x - grand);
  B *= static_cast<double>(n) / (m - 1.0);
  const double var = (n - 1.0) / n * W + B / n;
  return std::sqrt(var / W);
}

}  // namespace

TEST_CASE("split R-hat matches a hand transcription") {
  const std::vector<std::vector<double>> chains = {{1.0, 2.0, 0.5, 1.5, 2.5, 1.0}, {0.7, 1.9, 3.0, 1.1, 0.2, 1.4},
                                                   {2.0, 2.2, 1.8, 2.6, 2.4, 1.9}};
  CHECK(split_rhat(chains) == doctest::Approx(reference_rhat(chains)).epsilon(1e-12));
}

TEST_CASE("odd chain lengths drop the final draw") {
  std::vector<std::vector<double>> odd = {{1, 2, 3, 4, 5, 100}, {2, 1, 4, 3, 6, -50}};
  std::vector<std::vector<double>> trimmed = {{1, 2, 3, 4, 5}, {2, 1, 4, 3, 6}};
  // 5 draws: halves of 2, the 5th draw unused
  std::vector<std::vector<double>> four = {{1, 2, 3, 4}, {2, 1, 4, 3}};
  CHECK(split_rhat(trimmed) == doctest::Approx(split_rhat(four)).epsilon(1e-14));
  CHECK(split_rhat(odd) == doctest::Approx(reference_rhat(odd)).epsilon(1e-12));
}

TEST_CASE("R-hat on well mixed and on separated chains") {
  RngStream r(5, 5);
  std::vector<std::vector<double>> mixed(4, std::vector<double>(5000));
  for (auto& c : mixed)
    for (auto& x : c) x = sample_std_normal(r);
  CHECK(split_rhat(mixed) < 1.01);

  auto shifted = mixed;
  for (auto& x : shifted[0]) x += 2.0;
  CHECK(split_rhat(shifted) > 1.1);

  // a trend inside one chain is caught by the split
  auto trend = mixed;
  for (std::size_t t = 0; t < trend[1].size(); ++t) trend[1][t] += 3.0 * t / trend[1].size();
  CHECK(split_rhat(trend) > split_rhat(mixed));
}

TEST_CASE("R-hat edge cases") {
  CHECK(split_rhat({{1, 1, 1, 1}, {1, 1, 1, 1}}) == 1.0);
  CHECK(std::isinf(split_rhat({{1, 1, 1, 1}, {2, 2, 2, 2}})));
  CHECK_THROWS_AS(split_rhat({{1, 2, 3, 4}}), ParameterError);
  CHECK_THROWS_AS(split_rhat({{1, 2, 3}, {1, 2, 3}}), ParameterError);
  CHECK_THROWS_AS(split_rhat({{1, 2, 3, 4}, {1, 2, 3}}), ParameterError);
}

TEST_CASE("report covers every mu and eta when monitored") {
  DrawStore store;
  store.n_areas = 2;
  store.settings.monitor.eta = true;
  RngStream r(1, 2);
  for (int c = 0; c < 3; ++c) {
    ChainDraws d;
    d.kept = 100;
    for (int t = 0; t < 100; ++t) {
      d.mu.push_back(sample_std_normal(r));
      d.mu.push_back(sample_std_normal(r));
      d.eta.push_back(sample_std_normal(r));
    }
    store.chains.push_back(d);
  }
  const auto rep = rhat_report(store);
  CHECK(rep.parameters == std::vector<std::string>{"mu[1]", "mu[2]", "eta"});
  CHECK(rep.values.size() == 3);
  CHECK(rep.threshold == 1.05);
  CHECK(rep.pass() == (rep.values[0] < 1.05 && rep.values[1] < 1.05 && rep.values[2] < 1.05));
  RhatReport bad;
  bad.values = {1.0, 1.2};
  CHECK_FALSE(bad.pass());
}
