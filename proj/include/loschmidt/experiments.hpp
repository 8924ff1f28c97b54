#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loschmidt/echo.hpp"
#include "loschmidt/linalg.hpp"

namespace loschmidt::experiments {

enum class StateKind { haar, position };

const char* to_string(StateKind kind) noexcept;
StateKind parse_state_kind(const std::string& s);

ComplexVector random_state(std::size_t n, std::uint64_t seed, StateKind kind);

struct EnsembleSpec {
  std::size_t count = 100;
  std::uint64_t seed = 1;
  StateKind state_kind = StateKind::haar;
  std::size_t n = 0;
};

// Per-member intensities alongside the pointwise mean.
struct EnsembleData {
  echo::EchoCurve curve;                   // mean with standard errors
  std::vector<std::vector<double>> member; // member[i][t]
  std::vector<std::uint64_t> member_seeds;
};

EnsembleData ensemble_run(const EnsembleSpec& spec, echo::Backend backend, echo::EchoInstance instance,
                          echo::EchoKind kind, const std::vector<double>& times, unsigned workers = 1);

echo::EchoCurve ensemble_curve(const EnsembleSpec& spec, echo::Backend backend,
                               echo::EchoInstance instance, echo::EchoKind kind,
                               const std::vector<double>& times, unsigned workers = 1);

// Mean and standard error of each column of member.
echo::EchoCurve average_members(const std::vector<double>& times,
                                const std::vector<std::vector<double>>& member, echo::EchoKind kind);

struct RateFit {
  double rate = 0.0;
  double stderr_ = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t n_points = 0;
};

// Weighted regression of ln(value) on t over the contiguous stretch where
// value lies in (3 floor, 0.5).
RateFit fit_exponential_rate(const echo::EchoCurve& curve, double floor);

struct SaturationResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t n_points = 0;
};

inline constexpr double kTailFraction = 0.25;
inline constexpr double kDecayTimes = 10.0;

// Window [max(10/rate, 0.75 t_end), t_end]. A non-positive or NaN rate
// means "unknown": then the curve must reach 4 t_half.
SaturationResult estimate_saturation(const echo::EchoCurve& curve, double rate);
// Same window; the error bar comes from the scatter of per-member time averages.
SaturationResult estimate_saturation(const EnsembleData& data, double rate);

// Log-log slope and t -> 0 prefactor of a short-time defect 1 - M(t).
struct ShortTimeFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double prefactor = 0.0;  // lim (1 - M) / t^power
  std::size_t n_points = 0;
  double t_min = 0.0;
  double t_max = 0.0;
};

inline constexpr double kShortTimeLow = 1e-8;
inline constexpr double kShortTimeHigh = 1e-3;

ShortTimeFit fit_short_time(const std::vector<double>& times, const std::vector<double>& defect,
                            int power, double low = kShortTimeLow, double high = kShortTimeHigh);

// Geometric grid of `count` points on [t_min, t_max].
std::vector<double> geometric_grid(double t_min, double t_max, std::size_t count);

enum class RegimeFlag { valid, below_regime, above_regime, ergodic_floor };
const char* to_string(RegimeFlag f) noexcept;

struct ScalingPoint {
  std::size_t n = 0;
  double delta_k = 0.0;
  double m_inf = 0.0;
  double stderr_ = 0.0;
  double x = 0.0;  // delta_k * N^{3/2}
  double gamma_gr = 0.0;
  RegimeFlag flag = RegimeFlag::valid;
};

ScalingPoint make_scaling_point(std::size_t n, double delta_k, double m_inf, double stderr_);

struct PowerLawFit {
  double exponent = 0.0;  // b in m ~ x^{-b}
  double stderr_ = 0.0;
  double prefactor = 0.0;
  std::size_t n_points = 0;
};

inline constexpr std::size_t kMinScalingPoints = 5;

// Regression of ln m_inf on ln x over points flagged valid.
PowerLawFit fit_power_law(const std::vector<ScalingPoint>& points);

// Golden-rule regime filter: pi Gamma_GR >= 4 Delta and pi Gamma_GR <= B / 4,
// then points with m_inf < 2/N are at the ergodic floor.
RegimeFlag classify_point(std::size_t n, double delta_k, double m_inf);

struct ScanOptions {
  double k1 = 57.0;
  std::size_t count = 100;
  std::uint64_t seed = 1;
  StateKind state_kind = StateKind::haar;
  double heisenberg_multiple = 16.0;  // t_end = multiple * N kicks
  std::size_t tail_points = 64;
  unsigned workers = 1;
};

struct ScalingScan {
  std::vector<ScalingPoint> points;
  std::optional<PowerLawFit> fit;
  std::string fit_status;  // "fitted" or the reason it was not
};

// Full pipeline per (N, deltaK): eigendecomposition of both Floquet maps,
// ensemble M_Da out to t_end, tail average.
ScalingScan scaling_scan(const std::vector<std::size_t>& ns, const std::vector<double>& delta_ks,
                         const ScanOptions& options);

// Same pipeline on a common rescaled grid: deltaK = x / N^{3/2} for each N.
ScalingScan scaling_scan_on_x(const std::vector<std::size_t>& ns, const std::vector<double>& xs,
                              const ScanOptions& options);

// Kick grid for tail estimates: ~early_points geometric even kicks up to
// 0.75 t_end, then `tail_points` evenly spaced even kicks up to t_end.
std::vector<double> saturation_grid(long t_end, std::size_t early_points, std::size_t tail_points);

}  // namespace loschmidt::experiments
