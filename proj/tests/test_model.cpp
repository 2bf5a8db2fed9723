#include <doctest.h>

#include <cmath>

#include "glfuse/errors.hpp"
#include "glfuse/model.hpp"
#include "support.hpp"

using namespace glfuse;
using testsupport::make_panel;

TEST_CASE("variant table") {
  auto v = ModelVariant::from_tag(ModelTag::M11a);
  CHECK(v.local_prior == LocalPrior::Horseshoe);
  CHECK(v.theta_form == ThetaForm::Product);
  v = ModelVariant::from_tag(ModelTag::M11b);
  CHECK(v.local_prior == LocalPrior::Lasso);
  CHECK(v.theta_form == ThetaForm::Product);
  v = ModelVariant::from_tag(ModelTag::M1a);
  CHECK(v.local_prior == LocalPrior::Horseshoe);
  CHECK(v.theta_form == ThetaForm::SourceOnly);
  v = ModelVariant::from_tag(ModelTag::M1b);
  CHECK(v.local_prior == LocalPrior::Lasso);
  CHECK(v.theta_form == ThetaForm::SourceOnly);
  v = ModelVariant::from_tag(ModelTag::M12);
  CHECK(v.local_prior == LocalPrior::Unit);
  CHECK(v.theta_form == ThetaForm::Unit);
  CHECK_FALSE(v.free_lambda_ij());
  CHECK_FALSE(v.free_lambda_i());
  v = ModelVariant::from_tag(ModelTag::OneSource);
  CHECK(v.local_prior == LocalPrior::Horseshoe);
  CHECK_FALSE(v.has_theta());
  CHECK(v.free_lambda_i());
}

TEST_CASE("tag names round trip") {
  for (ModelTag t : kAllModelTags) CHECK(parse_model_tag(to_string(t)) == t);
  CHECK(parse_model_tag("M11A") == ModelTag::M11a);
  CHECK_THROWS_AS(parse_model_tag("m13"), ConfigError);
}

TEST_CASE("prior variances by form") {
  ChainState s;
  s.lambda_ij = Matrix(1, 2, 2.0);
  s.lambda_i = {3.0};
  s.tau1_sq = 0.5;
  s.tau2_sq = 0.1;
  CHECK(theta_prior_variance(s, ThetaForm::Product, 0, 1) == doctest::Approx(3.0));
  CHECK(theta_prior_variance(s, ThetaForm::SourceOnly, 0, 1) == doctest::Approx(1.0));
  CHECK(theta_prior_variance(s, ThetaForm::Unit, 0, 1) == 0.5);
  CHECK(mu_prior_variance(s, 0) == doctest::Approx(0.3));
}

TEST_CASE("panel validation lists every bad cell") {
  auto p = make_panel({{0.2, 0.3}, {0.25, 0.1}}, {{0.01, 0.0}, {-1.0, 0.02}});
  const auto r = validate_panel(p);
  REQUIRE(r.violations.size() == 2);
  CHECK(r.violations[0].area == 1);
  CHECK(r.violations[0].source == 2);
  CHECK(r.violations[1].area == 2);
  CHECK(r.violations[1].source == 1);
  CHECK_THROWS_AS(require_valid(p, ModelVariant::from_tag(ModelTag::M12)), ParameterError);

  auto q = make_panel({{0.2, 0.3}, {NAN, 0.1}}, {{0.01, 0.01}, {0.01, 0.02}});
  CHECK_FALSE(validate_panel(q).ok());
  auto one_area = make_panel({{0.2, 0.3}}, {{0.01, 0.01}});
  CHECK_FALSE(validate_panel(one_area).ok());
}

TEST_CASE("one-source model needs one column") {
  auto p = make_panel({{0.2, 0.3}, {0.25, 0.1}}, {{0.01, 0.02}, {0.03, 0.04}});
  const auto v = ModelVariant::from_tag(ModelTag::OneSource);
  CHECK_THROWS_AS(require_valid(p, v), ParameterError);
  const auto s = select_source(p, 1);
  CHECK_NOTHROW(require_valid(s, v));
  CHECK(s.n_sources() == 1);
  CHECK(s.y(1, 0) == 0.1);
  CHECK(s.v(0, 0) == 0.02);
  CHECK(s.sources == std::vector<std::string>{"s2"});
  CHECK_THROWS_AS(select_source(p, 2), ParameterError);
}

TEST_CASE("initial state") {
  auto p = make_panel({{0.2, 0.3}, {0.25, 0.1}}, {{0.01, 0.03}, {0.02, 0.02}});
  RngStream r(1, 1);
  auto s = init_state(p, ModelVariant::from_tag(ModelTag::M11a), 0.0, r);
  CHECK(s.mu[0] == doctest::Approx((0.2 / 0.01 + 0.3 / 0.03) / (1 / 0.01 + 1 / 0.03)));
  CHECK(s.mu[1] == doctest::Approx(0.175));
  CHECK(s.eta == doctest::Approx((s.mu[0] + s.mu[1]) / 2));
  CHECK(s.theta == p.y);
  CHECK(s.lambda_ij.rows() == 2);
  CHECK(variance_width(s) == 4 + 2 + 2);

  auto o = init_state(select_source(p, 0), ModelVariant::from_tag(ModelTag::OneSource), 0.0, r);
  CHECK(o.theta.empty());
  CHECK(o.lambda_ij.empty());
  CHECK(variance_width(o) == 2 + 2);

  RngStream r1(1, 1), r2(1, 1);
  auto a = init_state(p, ModelVariant::from_tag(ModelTag::M12), 0.05, r1);
  auto b = init_state(p, ModelVariant::from_tag(ModelTag::M12), 0.05, r2);
  CHECK(a == b);
  CHECK(a.mu[0] != doctest::Approx(s.mu[0]).epsilon(1e-12));
}

TEST_CASE("variance pack and unpack invert each other") {
  auto p = make_panel({{0.2, 0.3}, {0.25, 0.1}, {0.3, 0.3}}, {{0.01, 0.03}, {0.02, 0.02}, {0.01, 0.01}});
  RngStream r(1, 1);
  auto s = init_state(p, ModelVariant::from_tag(ModelTag::M11a), 0.0, r);
  double x = 1.0;
  for (double& v : s.lambda_ij.values()) v = (x += 0.5);
  for (double& v : s.lambda_i) v = (x += 0.5);
  s.tau1_sq = 0.123;
  s.tau2_sq = 4.56;
  std::vector<double> flat;
  pack_variances(s, flat);
  REQUIRE(flat.size() == variance_width(s));
  CHECK(flat.front() == 1.5);
  CHECK(flat[flat.size() - 2] == 0.123);
  CHECK(flat.back() == 4.56);
  auto t = init_state(p, ModelVariant::from_tag(ModelTag::M11a), 0.0, r);
  unpack_variances(flat.data(), t);
  CHECK(t.lambda_ij == s.lambda_ij);
  CHECK(t.lambda_i == s.lambda_i);
  CHECK(t.tau1_sq == s.tau1_sq);
  CHECK(t.tau2_sq == s.tau2_sq);
}

TEST_CASE("sampler settings") {
  const auto pe = SamplerSettings::point_estimation();
  CHECK(pe.n_iter == 18000);
  CHECK(pe.n_burnin == 3000);
  CHECK(pe.n_chains == 1);
  const auto dg = SamplerSettings::diagnostics();
  CHECK(dg.n_iter == 7000);
  CHECK(dg.n_burnin == 2000);
  CHECK(dg.n_chains == 5);
  SamplerSettings s;
  s.n_iter = 10;
  s.n_burnin = 5;
  CHECK(s.kept() == 5);
  s.thin = 2;
  CHECK(s.kept() == 2);
  s.n_chains = 0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s.n_chains = 1;
  s.n_burnin = 10;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}
