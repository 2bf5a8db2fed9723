#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glfuse/diagnostics.hpp"
#include "glfuse/io.hpp"
#include "glfuse/metrics.hpp"
#include "glfuse/model.hpp"
#include "glfuse/simgen.hpp"

namespace glfuse {

// A model as used by the simulation study: one of the five two-source
// variants, or the one-source model on one column (mbr = source 1, msa = source 2).
struct SimModel {
  std::string name;
  ModelTag tag = ModelTag::M12;
  std::optional<std::size_t> source;  // 0-based column for one-source fits
};
SimModel parse_sim_model(const std::string& name);

// Checks the config and fills preset-driven defaults (iterations, replicates,
// compare mode, model list). Throws ConfigError. Idempotent.
RunConfig resolve_config(RunConfig config);

// Posterior means of mu for one panel and model, chains run serially.
std::vector<double> fit_posterior_means(const SourcePanel& panel, const SimModel& model,
                                        const SamplerSettings& settings, std::uint32_t case_id, std::uint32_t row,
                                        std::uint32_t replicate);

struct ReplicateResult {
  std::optional<FitScore> score;  // empty when the fit failed
  std::size_t negative_truths = 0;
  std::string error;
};

struct StudyResult {
  std::vector<SimSpec> specs;
  std::vector<std::string> models;
  std::string base;  // denominator of the discrepancy ratios
  std::size_t n_replicates = 0;
  // cells[s][r][m]
  std::vector<std::vector<std::vector<ReplicateResult>>> cells;
  // medians[s][m]; empty when no replicate of that model succeeded
  std::vector<std::vector<std::optional<FitScore>>> medians;

  bool complete(std::size_t s) const;
  std::size_t model_index(const std::string& name) const;
  // median measure of `model` over that of the base, per spec (NaN when undefined)
  std::vector<double> ratios(const std::string& model, Measure m) const;
};

// Runs the study of a resolved simulate config. With a journal path, finished
// (spec, replicate) items are appended to it and, if it already exists, the
// items it lists are not recomputed.
StudyResult run_study(const RunConfig& config, unsigned workers = 0, const std::string& journal = {});

// Commands. Each writes manifest.json and its tables into config.out_dir.
void run_fit(const RunConfig& config, unsigned workers = 0);
StudyResult run_simulation(const RunConfig& config, unsigned workers = 0);
RhatReport run_diagnose(const RunConfig& config);
FitScore run_evaluate(const RunConfig& config);

}  // namespace glfuse
