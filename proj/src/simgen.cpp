#include "glfuse/simgen.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "glfuse/csv.hpp"
#include "glfuse/distributions.hpp"
#include "glfuse/errors.hpp"

namespace glfuse {

double LevelSpec::variance(bool delta) const {
  switch (kind) {
    case LevelKind::Outlier: return delta ? tau11 * tau11 : 0.0;
    case LevelKind::Mixture: return delta ? tau21 * tau21 : tau22 * tau22;
    case LevelKind::Fixed: return tau11 * tau11;
    case LevelKind::SourceSpecific: break;
  }
  throw ParameterError("source-specific level variances come from the case 5/6 parameters");
}

void LevelSpec::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(fmt::format("level probability {} outside [0, 1]", p));
  if (!(tau11 >= 0.0 && tau21 >= 0.0 && tau22 >= 0.0)) throw ParameterError("level scales must be >= 0");
}

void SimSpec::validate() const {
  if (case_id < 1 || case_id > 6) throw ParameterError(fmt::format("unknown case {}", case_id));
  theta_level.validate();
  mu_level.validate();
  if (n_areas < 2 || n_sources < 1) throw ParameterError("simulation needs I >= 2 and J >= 1");
  if (n_replicates == 0) throw ParameterError("n_replicates must be positive");
  if (case_id >= 5) {
    if (!case56) throw ParameterError("cases 5 and 6 need tau, tau1, p, tau2");
    if (n_sources != 2) throw ParameterError("cases 5 and 6 are defined for two sources");
    const auto& c = *case56;
    if (!(c.p >= 0.0 && c.p <= 1.0)) throw ParameterError("case 5 probability outside [0, 1]");
    if (!(c.tau >= 0.0 && c.tau1 >= 0.0 && c.tau2 >= 0.0)) throw ParameterError("case 5/6 scales must be >= 0");
  }
}

namespace {

LevelKind theta_kind(int case_id) {
  return (case_id == 3 || case_id == 4) ? LevelKind::Mixture : LevelKind::Outlier;
}
LevelKind mu_kind(int case_id) {
  return (case_id == 2 || case_id == 3) ? LevelKind::Mixture : LevelKind::Outlier;
}

LevelSpec level(LevelKind kind, double p, double tau) {
  LevelSpec l;
  l.kind = kind;
  l.p = p;
  if (kind == LevelKind::Outlier) l.tau11 = tau;
  else l.tau21 = tau;
  return l;
}

}  // namespace

SimSpec make_spec(int case_id, int row, double p_mu, double p_theta, double tau_mu, double tau_theta) {
  if (case_id < 1 || case_id > 4) throw ParameterError(fmt::format("make_spec handles cases 1-4, got {}", case_id));
  SimSpec s;
  s.case_id = case_id;
  s.row = row;
  s.mu_level = level(mu_kind(case_id), p_mu, tau_mu);
  s.theta_level = level(theta_kind(case_id), p_theta, tau_theta);
  return s;
}

SimSpec make_case56_spec(int case_id, int row, double tau, double tau1, double p, double tau2) {
  if (case_id != 5 && case_id != 6) throw ParameterError("make_case56_spec handles cases 5 and 6");
  SimSpec s;
  s.case_id = case_id;
  s.row = row;
  s.mu_level.kind = LevelKind::Fixed;
  s.mu_level.tau11 = tau;
  s.theta_level.kind = LevelKind::SourceSpecific;
  s.case56 = Case56Params{tau, tau1, case_id == 6 ? 1.0 : p, tau2};
  return s;
}

std::vector<SimSpec> spec_table(int case_id) {
  std::vector<SimSpec> out;
  int row = 0;
  switch (case_id) {
    case 1: {
      const double probs[5][2] = {{.1, .1}, {.2, .2}, {.4, .4}, {.1, .2}, {.2, .1}};
      const double taus[6][2] = {{.025, .025}, {.05, .05}, {.1, .1}, {.2, .2}, {.05, .1}, {.1, .05}};
      for (const auto& p : probs)
        for (const auto& t : taus) out.push_back(make_spec(1, ++row, p[0], p[1], t[0], t[1]));
      break;
    }
    case 2:
      for (double p_mu : {.1, .2})
        for (double p_theta : {.1, .2, .4})
          for (double tau_mu : {.1, .2})
            for (double tau_theta : {.05, .1, .2}) out.push_back(make_spec(2, ++row, p_mu, p_theta, tau_mu, tau_theta));
      break;
    case 3: {
      const double probs[4][2] = {{.1, .1}, {.2, .2}, {.1, .2}, {.2, .1}};
      const double taus[5][2] = {{.1, .1}, {.2, .2}, {.4, .4}, {.2, .4}, {.4, .2}};
      for (const auto& p : probs)
        for (const auto& t : taus) out.push_back(make_spec(3, ++row, p[0], p[1], t[0], t[1]));
      break;
    }
    case 4:
      for (double p_mu : {.1, .2})
        for (double tau_mu : {.05, .1, .2})
          for (double p_theta : {.1, .2})
            for (double tau_theta : {.1, .2, .4}) out.push_back(make_spec(4, ++row, p_mu, p_theta, tau_mu, tau_theta));
      break;
    case 5:
      for (double tau1 : {.005, .01})
        for (double p : {.1, .2, .4})
          for (double tau2 : {.05, .1, .2}) out.push_back(make_case56_spec(5, ++row, .05, tau1, p, tau2));
      break;
    case 6:
      for (double tau1 : {.005, .01})
        for (double tau2 : {.01, .02, .05, .1, .2, .4}) out.push_back(make_case56_spec(6, ++row, .05, tau1, 1.0, tau2));
      break;
    default:
      throw ParameterError(fmt::format("unknown case {} (expected 1-6)", case_id));
  }
  return out;
}

Matrix synthetic_v_pool(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  RngStream rng(seed, stream_key(kDomainPool, 0, 0, 0, 0, 0));
  const double lo = std::log(1e-5), hi = std::log(1e-2);
  const double band = (hi - lo) / static_cast<double>(cols);
  Matrix pool(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double top = hi - band * static_cast<double>(j);
      pool(i, j) = std::exp(top - band * rng.uniform());
    }
  }
  return pool;
}

Matrix bootstrap_v(const Matrix& pool, std::size_t rows, std::size_t cols, RngStream& rng) {
  if (pool.empty()) throw ConfigError("bootstrap_v: empty variance pool");
  const std::size_t n = pool.size();
  Matrix out(rows, cols);
  for (double& v : out.values()) {
    auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    if (k >= n) k = n - 1;
    v = pool.values()[k];
  }
  return out;
}

SimPanel generate(const SimSpec& spec, const Matrix& v_pool, RngStream& rng) {
  spec.validate();
  const std::size_t I = spec.n_areas, J = spec.n_sources;
  SimPanel out;
  auto& panel = out.panel;
  if (v_pool.empty()) throw ConfigError("generate: no sampling-variance pool");
  if (spec.v_mode == VMode::Bootstrap) {
    panel.v = bootstrap_v(v_pool, I, J, rng);
  } else {
    if (v_pool.rows() != I || v_pool.cols() != J) {
      throw ConfigError(fmt::format("variance pool is {}x{} but the spec needs {}x{} (use bootstrap mode)",
                                    v_pool.rows(), v_pool.cols(), I, J));
    }
    panel.v = v_pool;
  }
  for (std::size_t i = 0; i < I; ++i) panel.areas.push_back(fmt::format("{}", i + 1));
  for (std::size_t j = 0; j < J; ++j) panel.sources.push_back(fmt::format("{}", j + 1));
  panel.y = Matrix(I, J);
  out.truth_mu.assign(I, 0.0);
  out.truth_theta = Matrix(I, J);
  out.mu_flags.assign(I, 0);
  out.theta_flags = Matrix(I, J);

  const bool panel_scope = spec.delta_scope == DeltaScope::Panel;

  if (spec.case56) {
    const auto& c = *spec.case56;
    const bool panel_delta = panel_scope ? sample_bernoulli(c.p, rng) : false;
    for (std::size_t i = 0; i < I; ++i) out.truth_mu[i] = sample_normal(spec.eta, c.tau * c.tau, rng);
    for (std::size_t i = 0; i < I; ++i) {
      out.truth_theta(i, 0) = sample_normal(out.truth_mu[i], c.tau1 * c.tau1, rng);
      const bool delta = panel_scope ? panel_delta : sample_bernoulli(c.p, rng);
      out.theta_flags(i, 1) = delta ? 1.0 : 0.0;
      out.truth_theta(i, 1) = sample_normal(out.truth_mu[i], delta ? c.tau2 * c.tau2 : 0.0, rng);
    }
  } else {
    const auto& mu_l = spec.mu_level;
    const auto& th_l = spec.theta_level;
    const bool mu_panel_delta = panel_scope && mu_l.uses_delta() ? sample_bernoulli(mu_l.p, rng) : false;
    const bool th_panel_delta = panel_scope && th_l.uses_delta() ? sample_bernoulli(th_l.p, rng) : false;
    for (std::size_t i = 0; i < I; ++i) {
      bool delta = false;
      if (mu_l.uses_delta()) delta = panel_scope ? mu_panel_delta : sample_bernoulli(mu_l.p, rng);
      out.mu_flags[i] = delta ? 1 : 0;
      out.truth_mu[i] = sample_normal(spec.eta, mu_l.variance(delta), rng);
    }
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        bool delta = false;
        if (th_l.uses_delta()) delta = panel_scope ? th_panel_delta : sample_bernoulli(th_l.p, rng);
        out.theta_flags(i, j) = delta ? 1.0 : 0.0;
        out.truth_theta(i, j) = sample_normal(out.truth_mu[i], th_l.variance(delta), rng);
      }
    }
  }
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) panel.y(i, j) = sample_normal(out.truth_theta(i, j), panel.v(i, j), rng);
  }
  return out;
}

SimPanel generate(const SimSpec& spec, const Matrix& v_pool, std::uint64_t seed, std::uint32_t replicate) {
  RngStream rng(seed, stream_key(kDomainSimData, static_cast<std::uint32_t>(spec.case_id),
                                 static_cast<std::uint32_t>(spec.row), replicate, 0, 0));
  return generate(spec, v_pool, rng);
}

std::vector<SimSpec> load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open spec file {}", path.string()));
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<SimSpec> specs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (header.empty()) {
      header = fields;
      const std::vector<std::string> a = {"case", "row", "p_mu", "p_theta", "tau_mu", "tau_theta"};
      const std::vector<std::string> b = {"case", "row", "tau", "tau1", "p", "tau2"};
      if (header != a && header != b) {
        throw FormatError(fmt::format("{}:{}: expected header '{}' or '{}'", path.string(), line_no,
                                      "case,row,p_mu,p_theta,tau_mu,tau_theta", "case,row,tau,tau1,p,tau2"));
      }
      continue;
    }
    if (fields.size() != 6) {
      throw FormatError(fmt::format("{}:{}: expected 6 fields, got {}", path.string(), line_no, fields.size()));
    }
    std::size_t case_id = 0, row = 0;
    double x[4];
    bool ok = parse_size(fields[0], case_id) && parse_size(fields[1], row);
    for (int k = 0; k < 4; ++k) ok = ok && parse_double(fields[2 + k], x[k]);
    if (!ok) throw FormatError(fmt::format("{}:{}: malformed number", path.string(), line_no));
    const bool case56_header = header[2] == "tau";
    try {
      if (case56_header) {
        specs.push_back(make_case56_spec(static_cast<int>(case_id), static_cast<int>(row), x[0], x[1], x[2], x[3]));
      } else {
        specs.push_back(make_spec(static_cast<int>(case_id), static_cast<int>(row), x[0], x[1], x[2], x[3]));
      }
      specs.back().validate();
    } catch (const ParameterError& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  if (specs.empty()) throw FormatError(fmt::format("{}: no specification rows", path.string()));
  return specs;
}

void save_spec_file(const std::filesystem::path& path, const std::vector<SimSpec>& specs) {
  if (specs.empty()) throw ParameterError("save_spec_file: nothing to write");
  const bool c56 = specs.front().case56.has_value();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << (c56 ? "case,row,tau,tau1,p,tau2\n" : "case,row,p_mu,p_theta,tau_mu,tau_theta\n");
  for (const auto& s : specs) {
    if (s.case56.has_value() != c56) throw ParameterError("save_spec_file: cannot mix cases 1-4 with 5-6");
    if (c56) {
      const auto& c = *s.case56;
      out << fmt::format("{},{},{},{},{},{}\n", s.case_id, s.row, c.tau, c.tau1, c.p, c.tau2);
    } else {
      auto tau = [](const LevelSpec& l) { return l.kind == LevelKind::Outlier ? l.tau11 : l.tau21; };
      out << fmt::format("{},{},{},{},{},{}\n", s.case_id, s.row, s.mu_level.p, s.theta_level.p, tau(s.mu_level),
                         tau(s.theta_level));
    }
  }
}

std::vector<std::string> spec_column_names(int case_id) {
  switch (case_id) {
    case 1: return {"p2_mu", "p2_theta", "tau11_mu", "tau11_theta"};
    case 2: return {"p1_mu", "p2_theta", "tau21_mu", "tau11_theta"};
    case 3: return {"p1_mu", "p1_theta", "tau21_mu", "tau21_theta"};
    case 4: return {"p2_mu", "tau11_mu", "p1_theta", "tau21_theta"};
    case 5: return {"tau", "tau1", "p", "tau2"};
    case 6: return {"tau", "tau1", "tau2"};
    default: throw ParameterError(fmt::format("unknown case {}", case_id));
  }
}

std::vector<double> spec_column_values(const SimSpec& s) {
  auto tau = [](const LevelSpec& l) { return l.kind == LevelKind::Outlier ? l.tau11 : l.tau21; };
  switch (s.case_id) {
    case 1:
    case 2:
    case 3: return {s.mu_level.p, s.theta_level.p, tau(s.mu_level), tau(s.theta_level)};
    case 4: return {s.mu_level.p, tau(s.mu_level), s.theta_level.p, tau(s.theta_level)};
    case 5: return {s.case56->tau, s.case56->tau1, s.case56->p, s.case56->tau2};
    case 6: return {s.case56->tau, s.case56->tau1, s.case56->tau2};
    default: throw ParameterError(fmt::format("unknown case {}", s.case_id));
  }
}

}  // namespace glfuse
