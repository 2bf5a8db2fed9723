#include <doctest.h>

#include <set>
#include <vector>

#include "glfuse/errors.hpp"
#include "glfuse/rng.hpp"

using namespace glfuse;

// Known-answer vectors published with the Random123 library.
TEST_CASE("philox4x32-10 known answers") {
  using C = std::array<std::uint32_t, 4>;
  using K = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed and stream repeat, other streams differ") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<std::uint64_t> xa, xb, xc, xd;
  for (int k = 0; k < 100; ++k) {
    xa.push_back(a());
    xb.push_back(b());
    xc.push_back(c());
    xd.push_back(d());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);
}

TEST_CASE("state restores the exact position") {
  RngStream a(5, 1);
  for (int k = 0; k < 13; ++k) a();
  RngStream b(a.state());
  for (int k = 0; k < 50; ++k) CHECK(a() == b());
  CHECK(a.state() == b.state());
}

TEST_CASE("uniform stays inside (0, 1) with the right mean") {
  RngStream r(1, 2);
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is 1/sqrt(12 n) ~ 6.5e-4
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("stream keys are unique per coordinate and range checked") {
  std::set<std::uint64_t> keys;
  for (std::uint32_t d = 1; d <= 3; ++d)
    for (std::uint32_t c = 0; c < 3; ++c)
      for (std::uint32_t r = 0; r < 3; ++r)
        for (std::uint32_t rep = 0; rep < 3; ++rep)
          for (std::uint32_t m = 0; m < 3; ++m)
            for (std::uint32_t ch = 0; ch < 3; ++ch) keys.insert(stream_key(d, c, r, rep, m, ch));
  CHECK(keys.size() == 3u * 3 * 3 * 3 * 3 * 3);
  CHECK_THROWS_AS(stream_key(256, 0, 0, 0, 0, 0), ParameterError);
  CHECK_THROWS_AS(stream_key(1, 0, 4096, 0, 0, 0), ParameterError);
  CHECK_THROWS_AS(stream_key(1, 0, 0, 1u << 20, 0, 0), ParameterError);
}
