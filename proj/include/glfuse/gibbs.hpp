#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "glfuse/distributions.hpp"
#include "glfuse/model.hpp"

namespace glfuse {

// ---- full conditionals (exposed so tests can check them directly) ----------

NormalParams theta_conditional(double y, double v, double mu, double a);
NormalParams mu_conditional(const ChainState& s, const SourcePanel& panel, const ModelVariant& variant,
                            std::size_t i);
NormalParams eta_conditional(const ChainState& s);

InverseGammaParams horseshoe_lambda_ij_conditional(const ChainState& s, const ModelVariant& variant,
                                                   std::size_t i, std::size_t j);
InverseGammaParams horseshoe_lambda_i_conditional(const ChainState& s, const ModelVariant& variant,
                                                  std::size_t i);
GigParams lasso_lambda_ij_conditional(const ChainState& s, const ModelVariant& variant, std::size_t i,
                                      std::size_t j);
GigParams lasso_lambda_i_conditional(const ChainState& s, const ModelVariant& variant, std::size_t i);
InverseGammaParams tau1_conditional(const ChainState& s, const ModelVariant& variant);
InverseGammaParams tau2_conditional(const ChainState& s);
// xi | v for a horseshoe variance v.
InverseGammaParams aux_conditional(double variance);

// chi below which a GIG with nonpositive order is clamped
inline constexpr double kLassoChiFloor = 1e-30;

// ---- updates ----------------------------------------------------------------

void update_theta(ChainState& s, const SourcePanel& panel, const ModelVariant& variant, RngStream& rng);
void update_mu(ChainState& s, const SourcePanel& panel, const ModelVariant& variant, RngStream& rng);
void update_eta(ChainState& s, RngStream& rng);
void update_local_variances_horseshoe(ChainState& s, const ModelVariant& variant, RngStream& rng);
void update_local_variances_lasso(ChainState& s, const ModelVariant& variant, RngStream& rng);
void update_global_variances(ChainState& s, const ModelVariant& variant, RngStream& rng);

// One scan: theta, mu, eta, local variances, global variances.
void gibbs_sweep(ChainState& s, const SourcePanel& panel, const ModelVariant& variant, RngStream& rng,
                 bool pin_local_variances = false);

// Throws SamplerError naming the iteration and the first bad coordinate.
void check_state(const ChainState& s, std::size_t iteration);

// ---- draws ------------------------------------------------------------------

// Post-burn-in draws of one chain, each quantity stored row-per-draw.
struct ChainDraws {
  std::size_t kept = 0;
  std::vector<double> mu;         // kept x I
  std::vector<double> theta;      // kept x (I*J)
  std::vector<double> phi;        // kept x I
  std::vector<double> variances;  // kept x variance_width
  std::vector<double> eta;        // kept
  bool operator==(const ChainDraws&) const = default;
};

struct DrawStore {
  ModelVariant variant;
  SamplerSettings settings;
  std::size_t n_areas = 0;
  std::size_t n_sources = 0;
  std::size_t variance_width = 0;
  std::vector<ChainDraws> chains;

  // per-chain series of mu_i
  std::vector<std::vector<double>> mu_chains(std::size_t i) const;
  std::vector<std::vector<double>> phi_chains(std::size_t i) const;
  std::vector<std::vector<double>> eta_chains() const;
  std::vector<double> pooled_mu(std::size_t i) const;
  std::vector<double> pooled_phi(std::size_t i) const;
  std::size_t total_kept() const;
  bool operator==(const DrawStore&) const = default;
};

// Steps one chain and records its draws; can be checkpointed at any sweep.
// The panel must outlive the runner.
class ChainRunner {
 public:
  ChainRunner(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
              std::uint64_t stream_id);

  // Runs at most `sweeps` further iterations (stopping at n_iter).
  void advance(std::size_t sweeps);
  void run() { advance(settings_.n_iter); }

  std::size_t iteration() const { return iteration_; }
  bool done() const { return iteration_ >= settings_.n_iter; }
  const ChainState& state() const { return state_; }
  const ChainDraws& draws() const { return draws_; }
  ChainDraws take_draws() { return std::move(draws_); }

  // Versioned binary checkpoint; see checkpoint.cpp for the layout.
  void save_checkpoint(const std::filesystem::path& path) const;
  static ChainRunner load_checkpoint(const std::filesystem::path& path, const SourcePanel& panel);

 private:
  ChainRunner(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
              const RngStream& rng, ChainState state, std::size_t iteration, ChainDraws draws);
  void record();

  const SourcePanel* panel_;
  ModelVariant variant_;
  SamplerSettings settings_;
  RngStream rng_;
  ChainState state_;
  std::size_t iteration_ = 0;
  ChainDraws draws_;
  std::vector<double> scratch_;
};

ChainDraws run_chain(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
                     std::uint64_t stream_id);

// Where a run's chains draw their random streams from.
struct StreamBase {
  std::uint32_t domain = 1;
  std::uint32_t case_id = 0;
  std::uint32_t row = 0;
  std::uint32_t replicate = 0;
  // separates fits that share a model tag (one-source fits of different sources)
  std::uint32_t salt = 0;
  std::uint64_t chain_stream(ModelTag tag, std::size_t chain) const;
};

// Chains run on `workers` threads (0 = default_workers()); the result does not
// depend on the worker count.
DrawStore run_chains(const SourcePanel& panel, const ModelVariant& variant, const SamplerSettings& settings,
                     const StreamBase& streams = {}, unsigned workers = 0);

}  // namespace glfuse
