#include "glfuse/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/core.h>

#include "glfuse/errors.hpp"
#include "glfuse/stats.hpp"

namespace glfuse {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::ARB: return "arb";
    case Measure::ASRB: return "asrb";
    case Measure::AAD: return "aad";
    case Measure::ASD: return "asd";
  }
  return "?";
}

Measure parse_measure(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Measure m : kAllMeasures) {
    if (lower == to_string(m)) return m;
  }
  throw ConfigError(fmt::format("unknown measure '{}'", text));
}

double FitScore::get(Measure m) const {
  switch (m) {
    case Measure::ARB: return arb;
    case Measure::ASRB: return asrb;
    case Measure::AAD: return aad;
    case Measure::ASD: return asd;
  }
  return 0.0;
}

FitScore score(std::span<const double> estimates, std::span<const double> truths) {
  if (estimates.size() != truths.size()) throw ParameterError("score: estimates and truths differ in length");
  if (truths.empty()) throw ParameterError("score: no areas");
  FitScore s;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] == 0.0) throw ParameterError(fmt::format("score: truth {} is zero, relative measures undefined", i + 1));
    const double d = estimates[i] - truths[i];
    s.arb += std::fabs(d) / truths[i];
    s.asrb += (d * d) / (truths[i] * truths[i]);
    s.aad += std::fabs(d);
    s.asd += d * d;
  }
  const double n = static_cast<double>(truths.size());
  s.arb /= n;
  s.asrb /= n;
  s.aad /= n;
  s.asd /= n;
  return s;
}

std::size_t count_negative(std::span<const double> truths) {
  return static_cast<std::size_t>(std::count_if(truths.begin(), truths.end(), [](double t) { return t < 0.0; }));
}

FitScore aggregate(std::span<const FitScore> replicates) {
  if (replicates.empty()) throw ParameterError("aggregate: no replicates");
  auto med = [&](Measure m) {
    std::vector<double> v;
    v.reserve(replicates.size());
    for (const auto& r : replicates) v.push_back(r.get(m));
    return median(std::move(v));
  };
  return {med(Measure::ARB), med(Measure::ASRB), med(Measure::AAD), med(Measure::ASD)};
}

RatioSummary discrepancy_ratio(std::span<const double> model_medians, std::span<const double> base_medians,
                               std::string numerator, std::string denominator) {
  if (model_medians.size() != base_medians.size()) throw ParameterError("discrepancy_ratio: spec sets differ");
  if (model_medians.empty()) throw ParameterError("discrepancy_ratio: no specs");
  RatioSummary r;
  r.numerator = std::move(numerator);
  r.denominator = std::move(denominator);
  for (std::size_t s = 0; s < model_medians.size(); ++s) {
    if (base_medians[s] == 0.0) throw ParameterError(fmt::format("discrepancy_ratio: zero base median at spec {}", s + 1));
    r.ratios.push_back(model_medians[s] / base_medians[s]);
  }
  std::vector<double> sorted = r.ratios;
  std::sort(sorted.begin(), sorted.end());
  r.min = sorted.front();
  r.q1 = quantile_sorted(sorted, 0.25);
  r.median = quantile_sorted(sorted, 0.5);
  r.mean = mean(r.ratios);
  r.q3 = quantile_sorted(sorted, 0.75);
  r.max = sorted.back();
  return r;
}

BestModelCounts best_model_counts(const std::vector<std::string>& models,
                                  const std::vector<std::vector<double>>& ratios) {
  if (models.size() < 2) throw ParameterError("best_model_counts needs at least two models");
  if (ratios.size() != models.size()) throw ParameterError("best_model_counts: one ratio row per model");
  const std::size_t n_specs = ratios.front().size();
  for (const auto& r : ratios) {
    if (r.size() != n_specs) throw ParameterError("best_model_counts: ratio rows differ in length");
  }
  BestModelCounts out;
  out.models = models;
  out.counts.assign(models.size(), 0);
  for (std::size_t s = 0; s < n_specs; ++s) {
    double best = ratios[0][s];
    for (std::size_t m = 1; m < models.size(); ++m) best = std::min(best, ratios[m][s]);
    std::size_t winners = 0;
    for (std::size_t m = 0; m < models.size(); ++m) {
      if (ratios[m][s] == best) {
        ++out.counts[m];
        ++winners;
      }
    }
    if (winners > 1) out.tied_specs.push_back(s);
  }
  return out;
}

}  // namespace glfuse
