#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glfuse/matrix.hpp"
#include "glfuse/model.hpp"
#include "glfuse/rng.hpp"

namespace glfuse {

// How the variance gamma^2 of one level is drawn.
//   Outlier        delta ~ Bern(p), gamma^2 = delta * tau11^2
//   Mixture        delta ~ Bern(p), gamma^2 = delta * tau21^2 + (1 - delta) * tau22^2
//   Fixed          gamma^2 = tau11^2
//   SourceSpecific theta level of cases 5 and 6 (parameters live in Case56Params)
enum class LevelKind { Outlier, Mixture, Fixed, SourceSpecific };

struct LevelSpec {
  LevelKind kind = LevelKind::Fixed;
  double p = 0.0;
  double tau11 = 0.0;
  double tau21 = 0.0;
  double tau22 = 0.05;

  bool uses_delta() const { return kind == LevelKind::Outlier || kind == LevelKind::Mixture; }
  double variance(bool delta) const;
  void validate() const;
};

struct Case56Params {
  double tau = 0.05;   // sd of mu around eta
  double tau1 = 0.0;   // sd of theta_i1 around mu
  double p = 1.0;      // P(delta_i = 1) for source 2
  double tau2 = 0.0;   // sd of theta_i2 around mu when delta_i = 1
};

// unit: one delta per area (mu level) or per cell (theta level); panel: one per level
enum class DeltaScope { Unit, Panel };
// fixed: V is the pool itself (must be I x J); bootstrap: resampled per replicate
enum class VMode { Fixed, Bootstrap };

struct SimSpec {
  int case_id = 1;
  int row = 1;
  LevelSpec theta_level;
  LevelSpec mu_level;
  double eta = 0.25;
  std::size_t n_areas = 62;
  std::size_t n_sources = 2;
  VMode v_mode = VMode::Fixed;
  std::size_t n_replicates = 100;
  std::optional<Case56Params> case56;
  DeltaScope delta_scope = DeltaScope::Unit;

  void validate() const;
};

struct SimPanel {
  SourcePanel panel;
  std::vector<double> truth_mu;
  Matrix truth_theta;
  std::vector<std::uint8_t> mu_flags;  // delta per area (1 = fired)
  Matrix theta_flags;                  // delta per cell as 0/1
};

// Cases 1-4 levels, in the order of the paper's tables.
SimSpec make_spec(int case_id, int row, double p_mu, double p_theta, double tau_mu, double tau_theta);
// Cases 5-6 (case 6 forces p = 1).
SimSpec make_case56_spec(int case_id, int row, double tau, double tau1, double p, double tau2);

// The full specification grid of a case: 30, 36, 20, 36, 18 and 12 rows.
std::vector<SimSpec> spec_table(int case_id);

// Stand-in for observed sampling variances, covering [1e-5, 1e-2] on the log
// scale. The range is cut into one band per column, column 1 getting the
// noisiest band (source 1 plays the survey with the large standard errors,
// source 2 the model-based program); log-uniform within a band.
inline constexpr std::uint64_t kPoolSeed = 20180701;
Matrix synthetic_v_pool(std::size_t rows = 62, std::size_t cols = 2, std::uint64_t seed = kPoolSeed);

// I x J resample with replacement from the flattened pool.
Matrix bootstrap_v(const Matrix& pool, std::size_t rows, std::size_t cols, RngStream& rng);

SimPanel generate(const SimSpec& spec, const Matrix& v_pool, RngStream& rng);
// Uses the stream (sim-data, case, row, replicate).
SimPanel generate(const SimSpec& spec, const Matrix& v_pool, std::uint64_t seed, std::uint32_t replicate);

// Spec grid file. Header `case,row,p_mu,p_theta,tau_mu,tau_theta` for cases
// 1-4 or `case,row,tau,tau1,p,tau2` for cases 5-6; '#' lines are comments.
std::vector<SimSpec> load_spec_file(const std::filesystem::path& path);
void save_spec_file(const std::filesystem::path& path, const std::vector<SimSpec>& specs);

// Table columns describing a spec (names and values), in table order.
std::vector<std::string> spec_column_names(int case_id);
std::vector<double> spec_column_values(const SimSpec& spec);

}  // namespace glfuse
