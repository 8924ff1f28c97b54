#include <doctest.h>

#include "helpers.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/errors.hpp"
#include "loschmidt/experiments.hpp"
#include "loschmidt/models.hpp"

using namespace loschmidt;
using models::TimeDirection;
using testing::kPi;

TEST_CASE("free rotor acts diagonally on momentum states") {
  constexpr std::size_t n = 16;
  const models::KickedRotatorMap map(n, 0.0);
  for (std::size_t l : {0u, 1u, 3u, 7u}) {
    ComplexVector p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = std::polar(1.0 / std::sqrt(double(n)), 2.0 * kPi * double(j * l) / n);
    const auto out = map.apply(p, TimeDirection::forward);
    const Complex phase = std::polar(1.0, -2.0 * kPi * kPi * double(l * l) / n);
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(out[j] - phase * p[j]) < 1e-12);
  }
}

TEST_CASE("backward undoes forward and the map is linear and unitary") {
  const models::KickedRotatorMap map(64, 57.0, 1.0, 0.3, 0.2);
  const auto a = testing::random_vector(64, 1), b = testing::random_vector(64, 2);
  CHECK(max_abs_diff(map.apply(map.apply(a, TimeDirection::forward), TimeDirection::backward), a) < 1e-12);
  const Complex z(0.3, -1.1);
  const auto lhs = map.apply(a + z * b, TimeDirection::forward);
  const auto rhs = map.apply(a, TimeDirection::forward) + z * map.apply(b, TimeDirection::forward);
  CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto v = testing::random_vector(64, 100 + s);
    v *= 1.0 / v.norm();
    worst = std::max(worst, std::abs(map.apply(v, TimeDirection::forward).norm() - 1.0));
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("fast path matches the dense operator") {
  const models::KickedRotatorMap map(32, 10.0, 0.7, 0.1, 0.25, models::GridOrigin::one);
  const auto u = map.dense();
  const auto v = testing::random_vector(32, 9);
  CHECK(max_abs_diff(u.apply(v), map.apply(v, TimeDirection::forward)) < 1e-12);
  CHECK(max_abs_diff(u.adjoint().apply(v), map.apply(v, TimeDirection::backward)) < 1e-12);
  auto w = v;
  map.power_inplace(w.entries(), 5);
  map.power_inplace(w.entries(), -5);
  CHECK(max_abs_diff(w, v) < 1e-12);
}

TEST_CASE("kicked rotator argument checks") {
  CHECK_THROWS_AS(models::KickedRotatorMap(12, 1.0), SizeError);
  CHECK_THROWS(models::kr_pair(16, 1.0, -0.1));
}

TEST_CASE("zero perturbation gives identical maps") {
  const auto pair = models::kr_pair(32, 57.0, 0.0);
  CHECK(pair.delta_k() == 0.0);
  CHECK(testing::max_abs_diff(pair.u1.dense(), pair.u2.dense()) == 0.0);
  CHECK(pair.u1.plan() == pair.u2.plan());
}

TEST_CASE("grid origins agree statistically") {
  // The two conventions differ in one kinetic phase; ensemble M_L at moderate
  // times must agree within the sampling error.
  constexpr std::size_t n = 64;
  const auto a = models::kr_pair(n, 57.0, 0.02, 1.0, 0.0, 0.0, models::GridOrigin::zero);
  const auto b = models::kr_pair(n, 57.0, 0.02, 1.0, 0.0, 0.0, models::GridOrigin::one);
  std::vector<double> times;
  for (int t = 0; t <= 40; t += 4) times.push_back(t);
  experiments::EnsembleSpec spec{200, 4, experiments::StateKind::haar, n};
  const auto ca = experiments::ensemble_curve(spec, echo::Backend::floquet, &a, echo::EchoKind::loschmidt, times);
  const auto cb = experiments::ensemble_curve(spec, echo::Backend::floquet, &b, echo::EchoKind::loschmidt, times);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double se = std::hypot(ca.stderr_[i], cb.stderr_[i]);
    CHECK(std::abs(ca.values[i] - cb.values[i]) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("continuous-time pair construction") {
  const auto p = models::ct_pair(32, 0.1, 7);
  const auto q = models::ct_pair(32, 0.1, 7);
  CHECK(testing::max_abs_diff(p.h2, q.h2) == 0.0);
  CHECK(p.h1.hermiticity_defect() < 1e-14);
  CHECK(p.v.frobenius_norm() == doctest::Approx(std::sqrt(32.0)));
  CHECK(p.perturbation_norm / p.v.frobenius_norm() == doctest::Approx(0.1));
  CHECK(testing::max_abs_diff(p.h2 - p.h1, Complex(0.1) * p.v) < 1e-12);
  CHECK_THROWS(models::ct_pair(1, 0.1, 7));
}

TEST_CASE("perturbation operators of the Pauli pair") {
  const auto pair = models::make_pair(ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}),
                                      ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}}));
  const auto ops = models::perturbation_operators(pair);
  // (i/4)[X, Z] = (i/4)(-2iY) = Y/2
  const auto half_y = ComplexMatrix::from_rows({{0.0, Complex(0, -0.5)}, {Complex(0, 0.5), 0.0}});
  CHECK(testing::max_abs_diff(ops.sigma_da, half_y) < 1e-15);
  CHECK(ops.sigma_da.hermiticity_defect() < 1e-15);
  CHECK_THROWS_AS(models::make_pair(ComplexMatrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}), ComplexMatrix::identity(2)),
                  DomainError);
}

TEST_CASE("floquet spectral scales") {
  const auto s = models::floquet_scales(256);
  CHECK(s.bandwidth == doctest::Approx(2.0 * kPi));
  CHECK(s.delta == doctest::Approx(2.0 * kPi / 256));
  CHECK(models::floquet_sigma_l_squared(256, 1e-3) / s.delta == doctest::Approx(0.5 * 0.256 * 0.256));
}
