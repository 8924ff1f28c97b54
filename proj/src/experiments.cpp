#include "loschmidt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "loschmidt/errors.hpp"
#include "loschmidt/models.hpp"
#include "loschmidt/parallel.hpp"
#include "loschmidt/random.hpp"
#include "loschmidt/spectral.hpp"

namespace loschmidt::experiments {

using echo::EchoCurve;
using echo::EchoKind;

const char* to_string(StateKind kind) noexcept { return kind == StateKind::haar ? "haar" : "position"; }

StateKind parse_state_kind(const std::string& s) {
  if (s == "haar") return StateKind::haar;
  if (s == "position") return StateKind::position;
  throw DomainError("unknown state kind '" + s + "' (expected haar or position)");
}

ComplexVector random_state(std::size_t n, std::uint64_t seed, StateKind kind) {
  if (n == 0) throw SizeError("random_state: N must be positive");
  Rng rng(seed);
  if (kind == StateKind::position) return ComplexVector::basis(n, static_cast<std::size_t>(rng.below(n)));
  ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = {re, im};
  }
  v *= 1.0 / v.norm();
  return v;
}

EchoCurve average_members(const std::vector<double>& times, const std::vector<std::vector<double>>& member,
                          EchoKind kind) {
  EchoCurve curve;
  curve.kind = kind;
  curve.times = times;
  const std::size_t nt = times.size();
  const std::size_t count = member.size();
  curve.values.assign(nt, 0.0);
  curve.stderr_.assign(nt, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean += member[i][t];
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t i = 0; i < count; ++i) var += (member[i][t] - mean) * (member[i][t] - mean);
    curve.values[t] = mean;
    curve.stderr_[t] = count > 1 ? std::sqrt(var / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  }
  return curve;
}

EnsembleData ensemble_run(const EnsembleSpec& spec, echo::Backend backend, echo::EchoInstance instance,
                          EchoKind kind, const std::vector<double>& times, unsigned workers) {
  if (spec.count == 0) throw DomainError("ensemble: count must be at least 1");
  EnsembleData data;
  data.member.resize(spec.count);
  data.member_seeds.resize(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) data.member_seeds[i] = derive_seed(spec.seed, i);
  parallel_for(spec.count, workers, [&](std::size_t i) {
    const ComplexVector psi = random_state(spec.n, data.member_seeds[i], spec.state_kind);
    data.member[i] = echo::echo_curve(backend, instance, psi, kind, times).values;
  });
  data.curve = average_members(times, data.member, kind);
  return data;
}

EchoCurve ensemble_curve(const EnsembleSpec& spec, echo::Backend backend, echo::EchoInstance instance,
                         EchoKind kind, const std::vector<double>& times, unsigned workers) {
  return ensemble_run(spec, backend, instance, kind, times, workers).curve;
}

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_stderr = 0.0;
};

// Weighted least squares y = a + b x. With weights from known errors the
// slope error is scaled by sqrt(max(1, reduced chi^2)).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                 bool known_errors) {
  const std::size_t n = x.size();
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    chi2 += w[i] * r * r;
  }
  const double dof = n > 2 ? static_cast<double>(n - 2) : 1.0;
  if (known_errors) {
    f.slope_stderr = std::sqrt(std::max(1.0, chi2 / dof) / sxx);
  } else {
    f.slope_stderr = std::sqrt(chi2 / dof / sxx);
  }
  return f;
}

struct ZeroValue {
  double value = 0.0, stderr_ = 0.0;
};

// Unweighted least squares y = a + b x + c x^2; returns a and its error.
ZeroValue fit_quadratic_at_zero(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double m[3][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double basis[3] = {1.0, x[i], x[i] * x[i]};
    for (int r = 0; r < 3; ++r) {
      m[r][3] += basis[r] * y[i];
      for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
    }
  }
  // invert the normal matrix by Gauss-Jordan; the inverse gives the intercept variance
  double inv[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, a[3][3], rhs[3];
  for (int r = 0; r < 3; ++r) {
    rhs[r] = m[r][3];
    for (int c = 0; c < 3; ++c) a[r][c] = m[r][c];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const double d = a[col][col];
    for (int c = 0; c < 3; ++c) a[col][c] /= d, inv[col][c] /= d;
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = 0; c < 3; ++c) a[r][c] -= f * a[col][c], inv[r][c] -= f * inv[col][c];
    }
  }
  double coef[3];
  for (int r = 0; r < 3; ++r) coef[r] = inv[r][0] * rhs[0] + inv[r][1] * rhs[1] + inv[r][2] * rhs[2];
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = y[i] - coef[0] - coef[1] * x[i] - coef[2] * x[i] * x[i];
    chi2 += res * res;
  }
  const double dof = n > 3 ? static_cast<double>(n - 3) : 1.0;
  return {coef[0], std::sqrt(std::max(0.0, chi2 / dof * inv[0][0]))};
}

double tail_start(const EchoCurve& curve, double rate) {
  if (curve.size() == 0) throw FitError(FitFailure::insufficient_tail, "estimate_saturation: empty curve");
  const double t_end = curve.times.back();
  if (rate > 0.0 && std::isfinite(rate)) {
    const double decay = kDecayTimes / rate;
    if (decay > t_end) {
      throw FitError(FitFailure::insufficient_tail,
                     "estimate_saturation: curve ends at t=" + std::to_string(t_end) + " before 10/rate=" +
                         std::to_string(decay));
    }
    return std::max(decay, (1.0 - kTailFraction) * t_end);
  }
  double t_half = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve.values[i] < 0.5) {
      t_half = curve.times[i];
      break;
    }
  if (std::isnan(t_half)) {
    throw FitError(FitFailure::insufficient_tail, "estimate_saturation: curve never drops below 0.5");
  }
  if (t_end < 4.0 * t_half) {
    throw FitError(FitFailure::insufficient_tail,
                   "estimate_saturation: curve ends at t=" + std::to_string(t_end) + " before 4 t_half=" +
                       std::to_string(4.0 * t_half));
  }
  return (1.0 - kTailFraction) * t_end;
}

std::vector<std::size_t> window_indices(const EchoCurve& curve, double start) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve.times[i] >= start) idx.push_back(i);
  if (idx.empty()) throw FitError(FitFailure::insufficient_tail, "estimate_saturation: empty tail window");
  return idx;
}

SaturationResult members_tail(const EnsembleData& data, double start) {
  const auto idx = window_indices(data.curve, start);
  const std::size_t count = data.member.size();
  std::vector<double> per(count, 0.0);
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t i : idx) per[m] += data.member[m][i];
    per[m] /= static_cast<double>(idx.size());
  }
  double mean = 0.0;
  for (double v : per) mean += v;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double v : per) var += (v - mean) * (v - mean);
  SaturationResult r;
  r.mean = mean;
  r.stderr_ = count > 1 ? std::sqrt(var / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  r.t_start = data.curve.times[idx.front()];
  r.t_end = data.curve.times.back();
  r.n_points = idx.size();
  return r;
}

}  // namespace

RateFit fit_exponential_rate(const EchoCurve& curve, double floor) {
  const std::size_t n = curve.size();
  const double lo = 3.0 * floor;
  std::size_t first = n;
  for (std::size_t i = 0; i < n; ++i)
    if (curve.values[i] < 0.5) {
      first = i;
      break;
    }
  std::size_t last = first;
  while (last < n && curve.values[last] > lo && curve.values[last] < 0.5) ++last;
  if (first >= n || last - first < 3) {
    throw FitError(FitFailure::no_decay_window,
                   "fit_exponential_rate: no-decay-window (fewer than 3 points in (3 floor, 0.5))");
  }
  std::vector<double> x, y, w;
  bool known = curve.has_stderr();
  for (std::size_t i = first; i < last; ++i)
    if (known && !(curve.stderr_[i] > 0.0)) known = false;
  for (std::size_t i = first; i < last; ++i) {
    x.push_back(curve.times[i]);
    y.push_back(std::log(curve.values[i]));
    if (known) {
      const double s = curve.stderr_[i] / curve.values[i];
      w.push_back(1.0 / (s * s));
    } else {
      w.push_back(1.0);
    }
  }
  const LineFit f = fit_line(x, y, w, known);
  RateFit r;
  r.rate = -f.slope;
  r.stderr_ = f.slope_stderr;
  r.t_start = x.front();
  r.t_end = x.back();
  r.n_points = x.size();
  return r;
}

SaturationResult estimate_saturation(const EchoCurve& curve, double rate) {
  const auto idx = window_indices(curve, tail_start(curve, rate));
  double mean = 0.0;
  for (std::size_t i : idx) mean += curve.values[i];
  mean /= static_cast<double>(idx.size());
  double var = 0.0;
  for (std::size_t i : idx) var += (curve.values[i] - mean) * (curve.values[i] - mean);
  SaturationResult r;
  r.mean = mean;
  r.stderr_ =
      idx.size() > 1 ? std::sqrt(var / static_cast<double>(idx.size() - 1) / static_cast<double>(idx.size())) : 0.0;
  r.t_start = curve.times[idx.front()];
  r.t_end = curve.times.back();
  r.n_points = idx.size();
  return r;
}

SaturationResult estimate_saturation(const EnsembleData& data, double rate) {
  return members_tail(data, tail_start(data.curve, rate));
}

ShortTimeFit fit_short_time(const std::vector<double>& times, const std::vector<double>& defect, int power,
                            double low, double high) {
  if (times.size() != defect.size()) throw SizeError("fit_short_time: length mismatch");
  std::vector<double> t, d;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] > 0.0 && defect[i] >= low && defect[i] <= high) {
      t.push_back(times[i]);
      d.push_back(defect[i]);
    }
  if (t.size() < 4) {
    throw FitError(FitFailure::insufficient_points, "fit_short_time: fewer than 4 points in the defect window");
  }
  ShortTimeFit out;
  out.n_points = t.size();
  out.t_min = t.front();
  out.t_max = t.back();

  // Two-point log-slopes s(t) = p + c1 t + c2 t^2 + ..., extrapolated to t -> 0.
  std::vector<double> tm, slopes;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    tm.push_back(std::sqrt(t[i] * t[i + 1]) / out.t_max);
    slopes.push_back(std::log(d[i + 1] / d[i]) / std::log(t[i + 1] / t[i]));
  }
  const auto rs = fit_quadratic_at_zero(tm, slopes);
  out.slope = rs.value;
  out.slope_stderr = rs.stderr_;

  // log(defect / t^power) = log A + c1 t + c2 t^2
  std::vector<double> ts, lg;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ts.push_back(t[i] / out.t_max);
    lg.push_back(std::log(d[i]) - power * std::log(t[i]));
  }
  out.prefactor = std::exp(fit_quadratic_at_zero(ts, lg).value);
  return out;
}

std::vector<double> geometric_grid(double t_min, double t_max, std::size_t count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) throw DomainError("geometric_grid: invalid range");
  std::vector<double> g(count);
  const double r = std::log(t_max / t_min);
  for (std::size_t i = 0; i < count; ++i) g[i] = t_min * std::exp(r * static_cast<double>(i) / static_cast<double>(count - 1));
  return g;
}

const char* to_string(RegimeFlag f) noexcept {
  switch (f) {
    case RegimeFlag::valid: return "valid";
    case RegimeFlag::below_regime: return "below_regime";
    case RegimeFlag::above_regime: return "above_regime";
    case RegimeFlag::ergodic_floor: return "ergodic_floor";
  }
  return "unknown";
}

RegimeFlag classify_point(std::size_t n, double delta_k, double m_inf) {
  const auto scales = models::floquet_scales(n);
  const double gamma = spectral::golden_rule_gamma(std::sqrt(models::floquet_sigma_l_squared(n, delta_k)), scales.delta);
  const double pig = std::numbers::pi * gamma;
  constexpr double slack = 1e-9;  // grid points placed exactly on a boundary stay inside
  if (pig < 4.0 * scales.delta * (1.0 - slack)) return RegimeFlag::below_regime;
  if (pig > scales.bandwidth / 4.0 * (1.0 + slack)) return RegimeFlag::above_regime;
  if (m_inf < 2.0 / static_cast<double>(n)) return RegimeFlag::ergodic_floor;
  return RegimeFlag::valid;
}

ScalingPoint make_scaling_point(std::size_t n, double delta_k, double m_inf, double stderr_) {
  ScalingPoint p;
  p.n = n;
  p.delta_k = delta_k;
  p.m_inf = m_inf;
  p.stderr_ = stderr_;
  const double nd = static_cast<double>(n);
  p.x = delta_k * nd * std::sqrt(nd);
  p.gamma_gr = 0.5 * (delta_k * nd) * (delta_k * nd);
  p.flag = classify_point(n, delta_k, m_inf);
  return p;
}

PowerLawFit fit_power_law(const std::vector<ScalingPoint>& points) {
  std::vector<const ScalingPoint*> used;
  for (const auto& p : points)
    if (p.flag == RegimeFlag::valid && p.m_inf > 0.0 && p.x > 0.0) used.push_back(&p);
  if (used.size() < kMinScalingPoints) {
    throw FitError(FitFailure::insufficient_points, "scaling fit: " + std::to_string(used.size()) +
                                                        " regime-valid points, need " +
                                                        std::to_string(kMinScalingPoints));
  }
  bool known = true;
  for (auto* p : used) known = known && p->stderr_ > 0.0;
  std::vector<double> x, y, w;
  for (auto* p : used) {
    x.push_back(std::log(p->x));
    y.push_back(std::log(p->m_inf));
    const double s = known ? p->stderr_ / p->m_inf : 1.0;
    w.push_back(1.0 / (s * s));
  }
  const LineFit f = fit_line(x, y, w, known);
  PowerLawFit out;
  out.exponent = -f.slope;
  out.stderr_ = f.slope_stderr;
  out.prefactor = std::exp(f.intercept);
  out.n_points = used.size();
  return out;
}

std::vector<double> saturation_grid(long t_end, std::size_t early_points, std::size_t tail_points) {
  if (t_end < 8) throw DomainError("saturation_grid: t_end too short");
  t_end -= t_end % 2;
  std::vector<long> kicks{0};
  const double tail_from = (1.0 - kTailFraction) * static_cast<double>(t_end);
  if (early_points >= 2) {
    for (double t : geometric_grid(2.0, tail_from, early_points)) kicks.push_back(2 * std::lround(t / 2.0));
  }
  const long first_tail = 2 * static_cast<long>(std::ceil(tail_from / 2.0));
  const std::size_t n_tail = std::max<std::size_t>(tail_points, 2);
  for (std::size_t i = 0; i < n_tail; ++i) {
    const double t = first_tail + (static_cast<double>(t_end - first_tail) * static_cast<double>(i)) /
                                      static_cast<double>(n_tail - 1);
    kicks.push_back(2 * std::lround(t / 2.0));
  }
  std::sort(kicks.begin(), kicks.end());
  kicks.erase(std::unique(kicks.begin(), kicks.end()), kicks.end());
  return {kicks.begin(), kicks.end()};
}

namespace {

void scan_one_n(std::size_t n, const std::vector<double>& delta_ks, const ScanOptions& options,
                std::vector<ScalingPoint>& points) {
  if (!numkernel::is_power_of_two(n)) throw SizeError("scaling_scan: N=" + std::to_string(n) + " is not a power of two");
  const models::KickedRotatorMap base(n, options.k1);
  const numkernel::EigenSystem u1 = numkernel::unitary_eig(base.dense());
  const long t_end = 2 * std::lround(options.heisenberg_multiple * static_cast<double>(n) / 2.0);
  const std::vector<double> grid = saturation_grid(t_end, 24, options.tail_points);
  for (double dk : delta_ks) {
    const auto pair = models::kr_pair(n, options.k1, dk);
    const echo::SpectralFloquet spectral(u1, numkernel::unitary_eig(pair.u2.dense()));
    EnsembleSpec spec{options.count, options.seed, options.state_kind, n};
    const EnsembleData data =
        ensemble_run(spec, echo::Backend::floquet, &spectral, EchoKind::davidson, grid, options.workers);
    // a curve that never decays still has a well-defined last-quarter average
    SaturationResult sat;
    try {
      sat = estimate_saturation(data, std::numeric_limits<double>::quiet_NaN());
    } catch (const FitError&) {
      sat = members_tail(data, (1.0 - kTailFraction) * static_cast<double>(t_end));
    }
    points.push_back(make_scaling_point(n, dk, sat.mean, sat.stderr_));
  }
}

void finish_scan(ScalingScan& scan) {
  try {
    scan.fit = fit_power_law(scan.points);
    scan.fit_status = "fitted";
  } catch (const FitError& e) {
    scan.fit_status = std::string("not fitted: ") + e.what();
  }
}

}  // namespace

ScalingScan scaling_scan(const std::vector<std::size_t>& ns, const std::vector<double>& delta_ks,
                         const ScanOptions& options) {
  ScalingScan scan;
  for (std::size_t n : ns) scan_one_n(n, delta_ks, options, scan.points);
  finish_scan(scan);
  return scan;
}

ScalingScan scaling_scan_on_x(const std::vector<std::size_t>& ns, const std::vector<double>& xs,
                              const ScanOptions& options) {
  ScalingScan scan;
  for (std::size_t n : ns) {
    const double nd = static_cast<double>(n);
    std::vector<double> dks;
    for (double x : xs) dks.push_back(x / (nd * std::sqrt(nd)));
    scan_one_n(n, dks, options, scan.points);
  }
  finish_scan(scan);
  return scan;
}

}  // namespace loschmidt::experiments
