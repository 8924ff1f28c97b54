#pragma once

#include <array>
#include <cstdint>

namespace loschmidt::classical {

// Point on the torus [0, 2pi)^2.
struct ClassicalState {
  double x = 0.0;
  double p = 0.0;
};

double wrap_angle(double a) noexcept;

// Kick then drift: p' = p + K sin x, x' = x + p' (both mod 2 pi).
ClassicalState standard_map_step(ClassicalState s, double k) noexcept;

// Tangent map of one step at s, row-major [[dx'/dx, dx'/dp], [dp'/dx, dp'/dp]].
std::array<double, 4> standard_map_jacobian(ClassicalState s, double k) noexcept;

inline constexpr int kRenormalizeEvery = 10;
inline constexpr int kTransientSteps = 100;

struct LyapunovEstimate {
  double lambda = 0.0;  // per kick
  double stderr_ = 0.0;
  int transient_discarded = kTransientSteps;
  bool out_of_regime = false;  // K tau <= 7: ln(K tau / 2) not expected to hold
  double formula = 0.0;        // ln(K tau / 2)
};

// Benettin tangent-vector growth averaged over `ensemble` uniform initial
// points. Requires steps >= 1000 and ensemble >= 10.
LyapunovEstimate lyapunov_estimate(double k, long steps, int ensemble, std::uint64_t seed,
                                   double tau = 1.0, unsigned workers = 1);

}  // namespace loschmidt::classical
