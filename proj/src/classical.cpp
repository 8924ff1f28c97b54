#include "loschmidt/classical.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "loschmidt/errors.hpp"
#include "loschmidt/parallel.hpp"
#include "loschmidt/random.hpp"

namespace loschmidt::classical {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle(double a) noexcept {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // fmod of a tiny negative can round up to 2 pi
  return r;
}

ClassicalState standard_map_step(ClassicalState s, double k) noexcept {
  const double p = wrap_angle(s.p + k * std::sin(s.x));
  return {wrap_angle(s.x + p), p};
}

std::array<double, 4> standard_map_jacobian(ClassicalState s, double k) noexcept {
  const double kc = k * std::cos(s.x);
  return {1.0 + kc, 1.0, kc, 1.0};
}

LyapunovEstimate lyapunov_estimate(double k, long steps, int ensemble, std::uint64_t seed,
                                   double tau, unsigned workers) {
  if (steps < 1000) throw DomainError("lyapunov_estimate: steps must be at least 1000");
  if (ensemble < 10) throw DomainError("lyapunov_estimate: ensemble must be at least 10");
  if (!(tau > 0.0)) throw DomainError("lyapunov_estimate: tau must be positive");
  // tau enters the standard map only through the product K tau
  const double kt = k * tau;
  std::vector<double> rates(static_cast<std::size_t>(ensemble));
  parallel_for(rates.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    ClassicalState s{kTwoPi * rng.uniform(), kTwoPi * rng.uniform()};
    for (int t = 0; t < kTransientSteps; ++t) s = standard_map_step(s, kt);
    const double angle = kTwoPi * rng.uniform();
    double dx = std::cos(angle), dp = std::sin(angle);
    double log_growth = 0.0;
    for (long t = 1; t <= steps; ++t) {
      const auto j = standard_map_jacobian(s, kt);
      const double nx = j[0] * dx + j[1] * dp;
      const double np = j[2] * dx + j[3] * dp;
      dx = nx;
      dp = np;
      s = standard_map_step(s, kt);
      if (t % kRenormalizeEvery == 0 || t == steps) {
        const double norm = std::hypot(dx, dp);
        log_growth += std::log(norm);
        dx /= norm;
        dp /= norm;
      }
    }
    rates[i] = log_growth / static_cast<double>(steps);
  });
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(ensemble);
  double var = 0.0;
  for (double r : rates) var += (r - mean) * (r - mean);
  var /= static_cast<double>(ensemble - 1);

  LyapunovEstimate est;
  est.lambda = mean;
  est.stderr_ = std::sqrt(var / static_cast<double>(ensemble));
  est.out_of_regime = kt <= 7.0;
  est.formula = std::log(kt / 2.0);
  return est;
}

}  // namespace loschmidt::classical
