#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "glfuse/matrix.hpp"
#include "glfuse/rng.hpp"

namespace glfuse {

// Observed data: estimates y and known sampling variances v, both I x J.
struct SourcePanel {
  std::vector<std::string> areas;
  std::vector<std::string> sources;
  Matrix y;
  Matrix v;

  std::size_t n_areas() const { return y.rows(); }
  std::size_t n_sources() const { return y.cols(); }
};

// Single-source sub-panel (column j), used to fit the one-source model.
SourcePanel select_source(const SourcePanel& panel, std::size_t j);

enum class ModelTag { M11a, M11b, M1a, M1b, M12, OneSource };
enum class LocalPrior { Horseshoe, Lasso, Unit };

// Variance of theta_ij around mu_i:
//   Product    lambda_ij * lambda_i * tau1
//   SourceOnly lambda_ij * tau1
//   Unit       tau1
//   None       no theta level (one-source model)
enum class ThetaForm { Product, SourceOnly, Unit, None };

inline constexpr std::array<ModelTag, 6> kAllModelTags = {
    ModelTag::M11a, ModelTag::M11b, ModelTag::M1a, ModelTag::M1b, ModelTag::M12, ModelTag::OneSource};

struct ModelVariant {
  ModelTag tag = ModelTag::M12;
  LocalPrior local_prior = LocalPrior::Unit;
  ThetaForm theta_form = ThetaForm::Unit;

  static ModelVariant from_tag(ModelTag tag);

  bool has_theta() const { return theta_form != ThetaForm::None; }
  // lambda_ij is a free parameter
  bool free_lambda_ij() const { return theta_form == ThetaForm::Product || theta_form == ThetaForm::SourceOnly; }
  // lambda_i is a free parameter
  bool free_lambda_i() const { return local_prior != LocalPrior::Unit; }
  bool operator==(const ModelVariant&) const = default;
};

std::string_view to_string(ModelTag tag);
// Accepts m11a, m11b, m1a, m1b, m12, one-source (case-insensitive).
ModelTag parse_model_tag(std::string_view text);

// Complete latent state of one chain. All *_sq / lambda fields hold variances.
// For the one-source model theta, lambda_ij and xi_ij are empty and tau2_sq is
// the single global variance.
struct ChainState {
  Matrix theta;
  std::vector<double> mu;
  double eta = 0.0;

  Matrix lambda_ij;
  std::vector<double> lambda_i;
  double tau1_sq = 1.0;
  double tau2_sq = 1.0;

  // horseshoe auxiliaries, one per variance (unused entries stay at 1)
  Matrix xi_ij;
  std::vector<double> xi_i;
  double xi_tau1 = 1.0;
  double xi_tau2 = 1.0;

  bool operator==(const ChainState&) const = default;
};

// a_ij, the prior variance of theta_ij given mu_i.
inline double theta_prior_variance(const ChainState& s, ThetaForm form, std::size_t i, std::size_t j) {
  switch (form) {
    case ThetaForm::Product: return s.lambda_ij(i, j) * s.lambda_i[i] * s.tau1_sq;
    case ThetaForm::SourceOnly: return s.lambda_ij(i, j) * s.tau1_sq;
    default: return s.tau1_sq;
  }
}

// b_i, the prior variance of mu_i given eta.
inline double mu_prior_variance(const ChainState& s, std::size_t i) { return s.lambda_i[i] * s.tau2_sq; }

// Flat view of the variance parameters: lambda_ij (row-major), lambda_i, tau1, tau2.
std::size_t variance_width(const ChainState& s);
void pack_variances(const ChainState& s, std::vector<double>& out);
void unpack_variances(const double* values, ChainState& s);

struct Monitor {
  bool mu = true;
  bool theta = false;
  bool phi = false;
  bool variances = false;
  bool eta = false;
  bool operator==(const Monitor&) const = default;
};

struct SamplerSettings {
  std::size_t n_iter = 18000;
  std::size_t n_burnin = 3000;
  std::size_t n_chains = 1;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  Monitor monitor{};
  // sd of the N(0, sd^2) jitter applied to initial mu and eta
  double init_overdispersion = 0.0;
  // keep lambda_ij and lambda_i fixed at 1 (M12-equivalence checks)
  bool pin_local_variances = false;

  static SamplerSettings point_estimation();  // 1 chain, 18000 / 3000
  static SamplerSettings diagnostics();       // 5 chains, 7000 / 2000

  std::size_t kept() const { return (n_iter - n_burnin) / thin; }
  void validate() const;
  bool operator==(const SamplerSettings&) const = default;
};

struct Violation {
  // 1-based coordinates; 0 when the violation is not tied to a cell
  std::size_t area = 0;
  std::size_t source = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

ValidationReport validate_panel(const SourcePanel& panel);
// Throws ParameterError listing every violation.
void require_valid(const SourcePanel& panel, const ModelVariant& variant);

ChainState init_state(const SourcePanel& panel, const ModelVariant& variant, double overdispersion,
                      RngStream& rng);

}  // namespace glfuse
