#include <doctest.h>

#include "helpers.hpp"
#include "loschmidt/classical.hpp"
#include "loschmidt/errors.hpp"

using namespace loschmidt;
using testing::kPi;

TEST_CASE("free motion and the fixed point") {
  const auto s = classical::standard_map_step({1.0, 0.5}, 0.0);
  CHECK(s.p == doctest::Approx(0.5));
  CHECK(s.x == doctest::Approx(1.5));
  const auto f = classical::standard_map_step({0.0, 0.0}, 57.0);
  CHECK(f.x == 0.0);
  CHECK(f.p == 0.0);
}

TEST_CASE("orbits stay on the torus") {
  classical::ClassicalState s{0.3, 1.7};
  bool inside = true;
  for (int i = 0; i < 1000000; ++i) {
    s = classical::standard_map_step(s, 57.0);
    inside = inside && s.x >= 0.0 && s.x < 2.0 * kPi && s.p >= 0.0 && s.p < 2.0 * kPi;
  }
  CHECK(inside);
}

TEST_CASE("tangent map is area preserving") {
  for (double x : {0.0, 0.7, 2.5, 5.0}) {
    const auto j = classical::standard_map_jacobian({x, 1.0}, 57.0);
    CHECK(j[0] * j[3] - j[1] * j[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("Lyapunov exponents") {
  const auto k57 = classical::lyapunov_estimate(57.0, 10000, 100, 1);
  CHECK(std::abs(k57.lambda / std::log(28.5) - 1.0) < 0.05);
  CHECK_FALSE(k57.out_of_regime);
  const auto k10 = classical::lyapunov_estimate(10.0, 10000, 100, 1);
  CHECK(std::abs(k10.lambda / std::log(5.0) - 1.0) < 0.05);
  const auto small = classical::lyapunov_estimate(0.5, 10000, 20, 1);
  CHECK(small.out_of_regime);
  CHECK(small.lambda >= 0.0);

  double prev = 0.0;
  for (double k : {8.0, 16.0, 32.0, 57.0}) {
    const auto e = classical::lyapunov_estimate(k, 2000, 20, 2);
    CHECK(e.lambda > prev);
    prev = e.lambda;
  }
  CHECK_THROWS_AS(classical::lyapunov_estimate(57.0, 100, 100, 1), DomainError);
  CHECK_THROWS_AS(classical::lyapunov_estimate(57.0, 1000, 5, 1), DomainError);
}

TEST_CASE("Lyapunov estimate does not depend on the worker count") {
  const auto a = classical::lyapunov_estimate(20.0, 2000, 16, 9, 1.0, 1);
  const auto b = classical::lyapunov_estimate(20.0, 2000, 16, 9, 1.0, 3);
  CHECK(a.lambda == b.lambda);
  CHECK(a.stderr_ == b.stderr_);
}
