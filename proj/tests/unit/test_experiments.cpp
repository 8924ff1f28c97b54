#include <doctest.h>

#include "helpers.hpp"
#include "loschmidt/errors.hpp"
#include "loschmidt/experiments.hpp"
#include "loschmidt/models.hpp"

using namespace loschmidt;
using echo::EchoKind;
using experiments::StateKind;

TEST_CASE("random states") {
  const auto a = experiments::random_state(64, 3, StateKind::haar);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a == experiments::random_state(64, 3, StateKind::haar));
  CHECK_FALSE(a == experiments::random_state(64, 4, StateKind::haar));
  CHECK(experiments::random_state(64, 3, StateKind::position).norm() == doctest::Approx(1.0));
  CHECK(experiments::parse_state_kind("position") == StateKind::position);
  CHECK_THROWS(experiments::parse_state_kind("gaussian"));
}

TEST_CASE("Haar components have mean weight 1/N") {
  constexpr std::size_t n = 256;
  constexpr int samples = 10000;
  std::vector<double> sum(n, 0.0), sum2(n, 0.0);
  for (int s = 0; s < samples; ++s) {
    const auto v = experiments::random_state(n, derive_seed(77, s), StateKind::haar);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::norm(v[i]);
      sum[i] += w;
      sum2[i] += w * w;
    }
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / samples;
    const double var = (sum2[i] / samples - mean * mean) / samples;
    chi2 += (mean - 1.0 / n) * (mean - 1.0 / n) / var;
  }
  // chi^2 with 256 degrees of freedom: 5 sigma band
  CHECK(chi2 < n + 5.0 * std::sqrt(2.0 * n));
}

TEST_CASE("ensemble runs") {
  const auto pair = models::kr_pair(32, 57.0, 0.0);
  const std::vector<double> times{0, 2, 4, 8};
  experiments::EnsembleSpec spec{1, 5, StateKind::haar, 32};
  const auto one = experiments::ensemble_run(spec, echo::Backend::floquet, &pair, EchoKind::davidson, times);
  CHECK(one.member.size() == 1);
  for (double v : one.curve.values) CHECK(v == doctest::Approx(1.0));

  const auto pert = models::kr_pair(32, 57.0, 0.05);
  spec.count = 40;
  const auto a = experiments::ensemble_run(spec, echo::Backend::floquet, &pert, EchoKind::loschmidt, times, 1);
  const auto b = experiments::ensemble_run(spec, echo::Backend::floquet, &pert, EchoKind::loschmidt, times, 3);
  CHECK(a.curve.values == b.curve.values);
  CHECK(a.member_seeds == b.member_seeds);

  // standard error equals the member scatter over sqrt(count)
  const std::size_t i = 2;
  double mean = 0.0, var = 0.0;
  for (const auto& m : a.member) mean += m[i];
  mean /= a.member.size();
  for (const auto& m : a.member) var += (m[i] - mean) * (m[i] - mean);
  CHECK(a.curve.stderr_[i] == doctest::Approx(std::sqrt(var / (a.member.size() - 1) / a.member.size())));
}

TEST_CASE("exponential rate fit") {
  echo::EchoCurve c;
  for (int t = 0; t <= 40; ++t) {
    c.times.push_back(t);
    c.values.push_back(std::exp(-0.7 * t));
  }
  const auto f = experiments::fit_exponential_rate(c, 1e-9);
  CHECK(std::abs(f.rate - 0.7) < 1e-10);
  CHECK(f.n_points >= 3);

  echo::EchoCurve flat = c;
  for (auto& v : flat.values) v = 1.0;
  try {
    experiments::fit_exponential_rate(flat, 1e-3);
    FAIL("constant curve fitted");
  } catch (const FitError& e) {
    CHECK(e.kind() == FitFailure::no_decay_window);
  }
}

TEST_CASE("saturation estimate") {
  echo::EchoCurve c;
  for (int t = 0; t <= 400; ++t) {
    c.times.push_back(t);
    c.values.push_back(0.01 + 0.99 * std::exp(-0.5 * t));
  }
  const auto s = experiments::estimate_saturation(c, 0.5);
  CHECK(s.mean == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(s.t_start == doctest::Approx(300.0));
  CHECK(s.t_end == 400.0);
}

TEST_CASE("short-time fit") {
  const auto t = experiments::geometric_grid(1e-6, 1e-1, 200);
  std::vector<double> d;
  for (double x : t) d.push_back(2.0 * x * x * x * x * (1.0 - 3.0 * x));
  const auto f = experiments::fit_short_time(t, d, 4);
  CHECK(f.slope == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(f.prefactor == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_THROWS_AS(experiments::fit_short_time({1e-3, 2e-3}, {1e-6, 2e-6}, 2), FitError);
}

TEST_CASE("power law fit") {
  std::vector<experiments::ScalingPoint> pts;
  for (double x : {4.0, 5.0, 6.0, 8.0, 10.0, 12.0}) {
    experiments::ScalingPoint p;
    p.n = 512;
    p.x = x;
    p.m_inf = 3.0 * std::pow(x, -4.0);
    pts.push_back(p);
  }
  const auto f = experiments::fit_power_law(pts);
  CHECK(f.exponent == doctest::Approx(4.0));
  CHECK(f.prefactor == doctest::Approx(3.0));
  pts.resize(4);
  CHECK_THROWS_AS(experiments::fit_power_law(pts), FitError);
}

TEST_CASE("regime classification") {
  // x = deltaK N^{3/2}: valid band is 4 <= x <= sqrt(N)
  const std::size_t n = 256;
  const auto at = [&](double x, double m) { return experiments::classify_point(n, x / std::pow(256.0, 1.5), m); };
  CHECK(at(4.0, 0.1) == experiments::RegimeFlag::valid);
  CHECK(at(3.0, 0.1) == experiments::RegimeFlag::below_regime);
  CHECK(at(40.0, 0.1) == experiments::RegimeFlag::above_regime);
  CHECK(at(8.0, 1.0 / n) == experiments::RegimeFlag::ergodic_floor);
}

TEST_CASE("saturation grid") {
  const auto g = experiments::saturation_grid(1024, 24, 64);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1024.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    CHECK(std::fmod(g[i], 2.0) == 0.0);
  }
}
