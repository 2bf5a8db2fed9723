#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "glfuse/checkpoint.hpp"
#include "glfuse/errors.hpp"
#include "glfuse/gibbs.hpp"
#include "support.hpp"

using namespace glfuse;
namespace fs = std::filesystem;

namespace {

SourcePanel panel() {
  return testsupport::make_panel({{0.21, 0.26}, {0.30, 0.33}, {0.18, 0.24}, {0.27, 0.2}},
                                 {{0.004, 0.0009}, {0.006, 0.002}, {0.003, 0.001}, {0.002, 0.003}});
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "glfuse_test_checkpoint";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("state serialization is bit exact") {
  const auto p = panel();
  RngStream r(4, 4);
  SamplerSettings st;
  st.n_iter = 50;
  st.n_burnin = 0;
  st.seed = 4;
  ChainRunner runner(p, ModelVariant::from_tag(ModelTag::M11a), st, 1);
  runner.advance(37);
  const ChainState& s = runner.state();
  CHECK(deserialize_state(serialize_state(s)) == s);
  CHECK_THROWS_AS(deserialize_state(serialize_state(s).substr(0, 20)), FormatError);
}

TEST_CASE("interrupted and resumed chains match an uninterrupted run") {
  const auto p = panel();
  SamplerSettings st;
  st.n_iter = 600;
  st.n_burnin = 200;
  st.seed = 10;
  st.monitor.phi = true;
  st.monitor.eta = true;
  st.monitor.variances = true;
  for (ModelTag tag : {ModelTag::M11a, ModelTag::M1b, ModelTag::M12}) {
    const auto v = ModelVariant::from_tag(tag);
    const auto whole = run_chain(p, v, st, 5);
    for (std::size_t stop : {std::size_t{1}, std::size_t{150}, std::size_t{333}}) {
      ChainRunner first(p, v, st, 5);
      first.advance(stop);
      const auto path = scratch("chain.ckpt");
      first.save_checkpoint(path);
      auto resumed = ChainRunner::load_checkpoint(path, p);
      CHECK(resumed.iteration() == stop);
      resumed.run();
      CHECK(resumed.done());
      CHECK(resumed.draws() == whole);
    }
  }
}

TEST_CASE("checkpoint rejects another panel and corrupt files") {
  const auto p = panel();
  SamplerSettings st;
  st.n_iter = 20;
  st.n_burnin = 0;
  ChainRunner runner(p, ModelVariant::from_tag(ModelTag::M12), st, 1);
  runner.advance(5);
  const auto path = scratch("c2.ckpt");
  runner.save_checkpoint(path);

  auto other = p;
  other.y(0, 0) += 1e-12;
  CHECK(panel_fingerprint(other) != panel_fingerprint(p));
  CHECK_THROWS_AS(ChainRunner::load_checkpoint(path, other), ConfigError);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(ChainRunner::load_checkpoint(path, p), FormatError);
  CHECK_THROWS_AS(ChainRunner::load_checkpoint(scratch("missing.ckpt"), p), ConfigError);
}
