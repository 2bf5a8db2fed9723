#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace glfuse {

enum class Measure { ARB, ASRB, AAD, ASD };
inline constexpr std::array<Measure, 4> kAllMeasures = {Measure::ARB, Measure::ASRB, Measure::AAD, Measure::ASD};
std::string_view to_string(Measure m);
Measure parse_measure(std::string_view text);

struct FitScore {
  double arb = 0.0;   // mean |est - truth| / truth
  double asrb = 0.0;  // mean (est - truth)^2 / truth^2
  double aad = 0.0;   // mean |est - truth|
  double asd = 0.0;   // mean (est - truth)^2
  double get(Measure m) const;
  bool operator==(const FitScore&) const = default;
};

// Relative measures divide by the signed truth. A zero truth is an error.
FitScore score(std::span<const double> estimates, std::span<const double> truths);
std::size_t count_negative(std::span<const double> truths);

// Componentwise median (linear interpolation between order statistics).
FitScore aggregate(std::span<const FitScore> replicates);

struct RatioSummary {
  std::string numerator;
  std::string denominator;
  std::vector<double> ratios;  // one per spec
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Ratio of per-spec medians (model / base) and its spread over the specs.
RatioSummary discrepancy_ratio(std::span<const double> model_medians, std::span<const double> base_medians,
                               std::string numerator = "model", std::string denominator = "base");

struct BestModelCounts {
  std::vector<std::string> models;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> tied_specs;  // 0-based spec indices where the minimum was shared
};

// ratios[m][s] for model m and spec s. Every model attaining the minimum on a
// spec is credited; shared minima are listed in tied_specs.
BestModelCounts best_model_counts(const std::vector<std::string>& models,
                                  const std::vector<std::vector<double>>& ratios);

}  // namespace glfuse
