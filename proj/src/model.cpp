#include "glfuse/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/core.h>

#include "glfuse/distributions.hpp"
#include "glfuse/errors.hpp"

namespace glfuse {

SourcePanel select_source(const SourcePanel& panel, std::size_t j) {
  if (j >= panel.n_sources()) {
    throw ParameterError(fmt::format("select_source: source index {} out of range", j));
  }
  SourcePanel out;
  out.areas = panel.areas;
  if (j < panel.sources.size()) out.sources = {panel.sources[j]};
  out.y = Matrix(panel.n_areas(), 1);
  out.v = Matrix(panel.n_areas(), 1);
  for (std::size_t i = 0; i < panel.n_areas(); ++i) {
    out.y(i, 0) = panel.y(i, j);
    out.v(i, 0) = panel.v(i, j);
  }
  return out;
}

ModelVariant ModelVariant::from_tag(ModelTag tag) {
  switch (tag) {
    case ModelTag::M11a: return {tag, LocalPrior::Horseshoe, ThetaForm::Product};
    case ModelTag::M11b: return {tag, LocalPrior::Lasso, ThetaForm::Product};
    case ModelTag::M1a: return {tag, LocalPrior::Horseshoe, ThetaForm::SourceOnly};
    case ModelTag::M1b: return {tag, LocalPrior::Lasso, ThetaForm::SourceOnly};
    case ModelTag::M12: return {tag, LocalPrior::Unit, ThetaForm::Unit};
    case ModelTag::OneSource: return {tag, LocalPrior::Horseshoe, ThetaForm::None};
  }
  throw ParameterError("unknown model tag");
}

std::string_view to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::M11a: return "m11a";
    case ModelTag::M11b: return "m11b";
    case ModelTag::M1a: return "m1a";
    case ModelTag::M1b: return "m1b";
    case ModelTag::M12: return "m12";
    case ModelTag::OneSource: return "one-source";
  }
  return "?";
}

ModelTag parse_model_tag(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (ModelTag tag : kAllModelTags) {
    if (lower == to_string(tag)) return tag;
  }
  if (lower == "one_source" || lower == "onesource") return ModelTag::OneSource;
  throw ConfigError(fmt::format("unknown model '{}' (expected m11a, m11b, m1a, m1b, m12 or one-source)", text));
}

std::size_t variance_width(const ChainState& s) { return s.lambda_ij.size() + s.lambda_i.size() + 2; }

void pack_variances(const ChainState& s, std::vector<double>& out) {
  out.insert(out.end(), s.lambda_ij.values().begin(), s.lambda_ij.values().end());
  out.insert(out.end(), s.lambda_i.begin(), s.lambda_i.end());
  out.push_back(s.tau1_sq);
  out.push_back(s.tau2_sq);
}

void unpack_variances(const double* values, ChainState& s) {
  std::size_t k = 0;
  for (double& x : s.lambda_ij.values()) x = values[k++];
  for (double& x : s.lambda_i) x = values[k++];
  s.tau1_sq = values[k++];
  s.tau2_sq = values[k];
}

SamplerSettings SamplerSettings::point_estimation() { return {}; }

SamplerSettings SamplerSettings::diagnostics() {
  SamplerSettings s;
  s.n_iter = 7000;
  s.n_burnin = 2000;
  s.n_chains = 5;
  s.init_overdispersion = 0.05;
  return s;
}

void SamplerSettings::validate() const {
  if (n_iter == 0) throw ParameterError("n_iter must be positive");
  if (n_burnin >= n_iter) throw ParameterError("n_burnin must be smaller than n_iter");
  if (n_chains == 0) throw ParameterError("n_chains must be positive");
  if (thin == 0) throw ParameterError("thin must be positive");
  if (!(init_overdispersion >= 0.0)) throw ParameterError("init_overdispersion must be >= 0");
}

std::string ValidationReport::describe() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    if (v.area > 0 && v.source > 0) {
      out += fmt::format("({},{}): {}", v.area, v.source, v.message);
    } else {
      out += v.message;
    }
  }
  return out;
}

ValidationReport validate_panel(const SourcePanel& panel) {
  ValidationReport report;
  auto add = [&](std::size_t i, std::size_t j, std::string msg) {
    report.violations.push_back({i, j, std::move(msg)});
  };
  const std::size_t I = panel.y.rows();
  const std::size_t J = panel.y.cols();
  if (I < 2) add(0, 0, fmt::format("need at least 2 areas, got {}", I));
  if (J < 1) add(0, 0, "need at least 1 source");
  if (panel.v.rows() != I || panel.v.cols() != J) {
    add(0, 0, fmt::format("y is {}x{} but v is {}x{}", I, J, panel.v.rows(), panel.v.cols()));
    return report;
  }
  if (!panel.areas.empty() && panel.areas.size() != I) add(0, 0, "area labels do not match the number of rows");
  if (!panel.sources.empty() && panel.sources.size() != J) add(0, 0, "source labels do not match the number of columns");
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      if (!std::isfinite(panel.y(i, j))) add(i + 1, j + 1, "estimate is not finite");
      const double v = panel.v(i, j);
      if (!(v > 0.0) || !std::isfinite(v)) add(i + 1, j + 1, fmt::format("sampling variance must be > 0, got {}", v));
    }
  }
  return report;
}

void require_valid(const SourcePanel& panel, const ModelVariant& variant) {
  const auto report = validate_panel(panel);
  if (!report.ok()) throw ParameterError("invalid panel: " + report.describe());
  if (variant.tag == ModelTag::OneSource && panel.n_sources() != 1) {
    throw ParameterError("the one-source model needs a single-source panel (use select_source)");
  }
}

ChainState init_state(const SourcePanel& panel, const ModelVariant& variant, double overdispersion,
                      RngStream& rng) {
  if (!(overdispersion >= 0.0)) throw ParameterError("init_state: overdispersion must be >= 0");
  const std::size_t I = panel.n_areas();
  const std::size_t J = panel.n_sources();
  ChainState s;
  s.mu.assign(I, 0.0);
  for (std::size_t i = 0; i < I; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      num += panel.y(i, j) / panel.v(i, j);
      den += 1.0 / panel.v(i, j);
    }
    s.mu[i] = num / den;
  }
  double total = 0.0;
  for (double m : s.mu) total += m;
  s.eta = total / static_cast<double>(I);

  if (variant.has_theta()) {
    s.theta = panel.y;
    s.lambda_ij = Matrix(I, J, 1.0);
    s.xi_ij = Matrix(I, J, 1.0);
  }
  s.lambda_i.assign(I, 1.0);
  s.xi_i.assign(I, 1.0);

  if (overdispersion > 0.0) {
    const double var = overdispersion * overdispersion;
    for (double& m : s.mu) m += sample_normal(0.0, var, rng);
    s.eta += sample_normal(0.0, var, rng);
  }
  return s;
}

}  // namespace glfuse
