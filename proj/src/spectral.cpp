#include "loschmidt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "loschmidt/errors.hpp"

namespace loschmidt::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

void check_orthonormal(const numkernel::EigenSystem& e, const char* name) {
  if (numkernel::orthonormality_defect(e.vectors) > 1e-8) {
    throw DomainError(std::string("overlap_matrix: basis ") + name + " is not orthonormal");
  }
}

}  // namespace

double OverlapMatrix::stochasticity_defect() const {
  double worst = 0.0;
  std::vector<double> cols(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    double row = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      row += weights[u * n + v];
      cols[v] += weights[u * n + v];
    }
    worst = std::max(worst, std::abs(row - 1.0));
  }
  for (double c : cols) worst = std::max(worst, std::abs(c - 1.0));
  return worst;
}

ComplexMatrix overlap_amplitudes(const numkernel::EigenSystem& u1, const numkernel::EigenSystem& u2) {
  if (u1.dim() != u2.dim() || u1.vectors.dim() != u2.vectors.dim()) {
    throw SizeError("overlap_matrix: dimension mismatch");
  }
  return u1.vectors.adjoint() * u2.vectors;
}

OverlapMatrix overlap_matrix(const ComplexMatrix& c, std::vector<double> u_phases,
                             std::vector<double> v_phases) {
  const std::size_t n = c.dim();
  if (u_phases.size() != n || v_phases.size() != n) throw SizeError("overlap_matrix: phase count mismatch");
  OverlapMatrix ov;
  ov.n = n;
  ov.weights.resize(n * n);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u) ov.weights[u * n + v] = std::norm(c(u, v));
  ov.u_phases = std::move(u_phases);
  ov.v_phases = std::move(v_phases);
  return ov;
}

OverlapMatrix overlap_matrix(const numkernel::EigenSystem& u1, const numkernel::EigenSystem& u2) {
  const ComplexMatrix c = overlap_amplitudes(u1, u2);
  check_orthonormal(u1, "U1");
  check_orthonormal(u2, "U2");
  return overlap_matrix(c, u1.values, u2.values);
}

double mda_saturation_oracle(const OverlapMatrix& ov) {
  double s = 0.0;
  for (double w : ov.weights) s += w * w;
  return s / static_cast<double>(ov.n);
}

double ml_saturation_sum(const ComplexMatrix& c, const ComplexVector& coeff) {
  const std::size_t n = c.dim();
  if (n > kMlSaturationMaxN) {
    throw SizeError("ml_saturation_sum: N=" + std::to_string(n) + " exceeds cap " +
                    std::to_string(kMlSaturationMaxN));
  }
  if (coeff.dim() != n) throw SizeError("ml_saturation_sum: coefficient dimension mismatch");
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto col = c.column(v);
    Complex proj = 0.0;  // <psi|v>
    double spread = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      proj += std::conj(coeff[u]) * col[u];
      spread += std::norm(coeff[u]) * std::norm(col[u]);
    }
    total += std::norm(proj) * spread;
  }
  return total;
}

double ml_saturation_sum_literal(const ComplexMatrix& c, const ComplexVector& coeff) {
  const std::size_t n = c.dim();
  if (n > kMlSaturationLiteralMaxN) {
    throw SizeError("ml_saturation_sum_literal: N=" + std::to_string(n) + " exceeds cap " +
                    std::to_string(kMlSaturationLiteralMaxN));
  }
  if (coeff.dim() != n) throw SizeError("ml_saturation_sum_literal: coefficient dimension mismatch");
  Complex total = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t u1 = 0; u1 < n; ++u1)
      for (std::size_t u2 = 0; u2 < n; ++u2) {
        const Complex pre = std::conj(coeff[u]) * coeff[u2] * std::norm(coeff[u1]);
        for (std::size_t v = 0; v < n; ++v) {
          total += pre * c(u, v) * std::conj(c(u1, v)) * c(u1, v) * std::conj(c(u2, v));
        }
      }
  return total.real();
}

double ml_saturation_haar_mean(const OverlapMatrix& ov) {
  const double nd = static_cast<double>(ov.n);
  double s = 0.0;
  for (double w : ov.weights) s += w * w;
  return (nd + s) / (nd * (nd + 1.0));
}

double wrapped_difference(double a, double b) {
  double d = std::remainder(a - b, 2.0 * kPi);  // [-pi, pi]
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

double LdosHistogram::normalization() const {
  double s = 0.0;
  for (double d : density) s += d;
  return s * bin_width / delta;
}

namespace {

LdosHistogram empty_histogram(double bin_width, double delta) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("ldos_histogram: bin width must be positive");
  const long half = static_cast<long>(std::ceil(kPi / bin_width - 0.5));
  LdosHistogram h;
  h.bin_width = bin_width;
  h.delta = delta;
  for (long k = -half; k <= half; ++k) h.bin_centers.push_back(static_cast<double>(k) * bin_width);
  h.density.assign(h.bin_centers.size(), 0.0);
  h.counts.assign(h.bin_centers.size(), 0);
  return h;
}

}  // namespace

LdosHistogram ldos_histogram(const OverlapMatrix& ov, double bin_width) {
  const std::size_t n = ov.n;
  if (n == 0) throw SizeError("ldos_histogram: empty overlap matrix");
  const double delta = 2.0 * kPi / static_cast<double>(n);
  if (bin_width < 0.25 * delta * (1.0 - 1e-12)) {
    throw DomainError("ldos_histogram: bin width below Delta/4");
  }
  LdosHistogram h = empty_histogram(bin_width, delta);
  const long half = static_cast<long>(h.bin_centers.size() / 2);
  std::vector<double> sums(h.bin_centers.size(), 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      const double e = wrapped_difference(ov.u_phases[u], ov.v_phases[v]);
      long k = std::lround(e / bin_width) + half;
      k = std::clamp<long>(k, 0, static_cast<long>(sums.size()) - 1);
      sums[k] += ov.weights[u * n + v];
      h.counts[k] += 1;
    }
  for (std::size_t k = 0; k < sums.size(); ++k)
    h.density[k] = h.counts[k] ? sums[k] / static_cast<double>(h.counts[k]) : 0.0;
  return h;
}

double lorentzian_bin_average(double e, double bin_width, double gamma, double delta) {
  const double h = 0.5 * bin_width;
  const double g = 0.5 * gamma;
  return delta / (kPi * bin_width) * (std::atan((e + h) / g) - std::atan((e - h) / g));
}

LdosHistogram synthetic_lorentzian(double gamma, double delta, double bin_width) {
  if (!(gamma > 0.0) || !(delta > 0.0)) throw DomainError("synthetic_lorentzian: parameters must be positive");
  LdosHistogram h = empty_histogram(bin_width, delta);
  for (std::size_t k = 0; k < h.bin_centers.size(); ++k) {
    h.density[k] = lorentzian_bin_average(h.bin_centers[k], bin_width, gamma, delta);
    h.counts[k] = 1;
  }
  return h;
}

double half_height_width(const LdosHistogram& h) {
  const std::size_t nb = h.density.size();
  if (nb < 3) throw FitError(FitFailure::no_peak, "lorentzian_fit: too few bins for a peak");
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(h.density.begin(), h.density.end()) - h.density.begin());
  const double top = h.density[peak];
  if (!(top > 0.0)) throw FitError(FitFailure::no_peak, "lorentzian_fit: no peak (zero density)");
  const double half = 0.5 * top;
  auto neighbour_empty = [&](std::size_t k) { return h.density[k] <= 1e-12 * top; };
  if (peak > 0 && peak + 1 < nb && neighbour_empty(peak - 1) && neighbour_empty(peak + 1)) {
    throw FitError(FitFailure::no_peak, "lorentzian_fit: no peak (single-bin spike, width unresolved)");
  }
  double right = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = peak + 1; k < nb; ++k) {
    if (h.counts[k] != 0 && h.density[k] < half) {
      const double d0 = h.density[k - 1], d1 = h.density[k];
      const double f = (d0 - half) / (d0 - d1);
      right = h.bin_centers[k - 1] + f * (h.bin_centers[k] - h.bin_centers[k - 1]);
      break;
    }
  }
  double left = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = peak; k-- > 0;) {
    if (h.counts[k] != 0 && h.density[k] < half) {
      const double d0 = h.density[k + 1], d1 = h.density[k];
      const double f = (d0 - half) / (d0 - d1);
      left = h.bin_centers[k + 1] - f * (h.bin_centers[k + 1] - h.bin_centers[k]);
      break;
    }
  }
  if (std::isnan(left) || std::isnan(right)) {
    throw FitError(FitFailure::no_peak, "lorentzian_fit: no peak (no half-height crossing)");
  }
  return right - left;
}

LorentzianFit lorentzian_fit(const LdosHistogram& h) {
  std::size_t nonempty = 0;
  for (auto c : h.counts) nonempty += c != 0;
  if (nonempty < 8) {
    throw FitError(FitFailure::insufficient_points, "lorentzian_fit: fewer than 8 nonempty bins");
  }
  LorentzianFit fit;
  fit.gamma_init = half_height_width(h);
  fit.window = std::min(0.5 * kPi, 20.0 * fit.gamma_init);

  std::vector<double> es, ds;
  for (std::size_t k = 0; k < h.density.size(); ++k) {
    if (h.counts[k] == 0 || std::abs(h.bin_centers[k]) > fit.window + 1e-12) continue;
    es.push_back(h.bin_centers[k]);
    ds.push_back(h.density[k]);
  }
  if (es.size() < 8) {
    throw FitError(FitFailure::insufficient_points, "lorentzian_fit: fewer than 8 bins inside the fit window");
  }
  fit.bins_used = es.size();

  // amplitude enters linearly; profile it out for each trial width
  auto solve = [&](double gamma, double& amplitude) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      const double m = lorentzian_bin_average(es[i], h.bin_width, gamma, h.delta);
      sxy += m * ds[i];
      sxx += m * m;
    }
    amplitude = sxx > 0.0 ? sxy / sxx : 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      const double r = ds[i] - amplitude * lorentzian_bin_average(es[i], h.bin_width, gamma, h.delta);
      ss += r * r;
    }
    return ss;
  };
  auto objective = [&](double log_gamma) {
    double a = 0.0;
    return solve(std::exp(log_gamma), a);
  };

  const double lo = std::log(fit.gamma_init / 50.0);
  const double hi = std::log(std::min(fit.gamma_init * 50.0, 4.0 * kPi));
  constexpr int kScan = 80;
  double best_x = lo, best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    const double f = objective(x);
    if (f < best_f) best_f = f, best_x = x;
  }
  const double step = (hi - lo) / kScan;
  std::uintmax_t iterations = 200;
  const auto [x_min, f_min] = boost::math::tools::brent_find_minima(
      objective, std::max(lo, best_x - step), std::min(hi, best_x + step),
      std::numeric_limits<double>::digits / 2 + 4, iterations);
  if (iterations >= 200) {
    throw FitError(FitFailure::not_converged, "lorentzian_fit: width search did not converge",
                   std::sqrt(f_min / static_cast<double>(es.size())));
  }
  fit.gamma = std::exp(x_min);
  double amplitude = 0.0;
  const double ss = solve(fit.gamma, amplitude);
  fit.amplitude = amplitude;
  fit.rms_residual = std::sqrt(ss / static_cast<double>(es.size()));
  const double peak = *std::max_element(ds.begin(), ds.end());
  fit.relative_rms = peak > 0.0 ? fit.rms_residual / peak : 0.0;
  if (!(fit.gamma > 0.0) || !std::isfinite(fit.gamma)) {
    throw FitError(FitFailure::not_converged, "lorentzian_fit: non-positive width", fit.rms_residual);
  }
  return fit;
}

double default_bin_width(const OverlapMatrix& ov) {
  const double delta = 2.0 * kPi / static_cast<double>(ov.n);
  try {
    const double g = half_height_width(ldos_histogram(ov, delta));
    return std::max(delta, g / 10.0);
  } catch (const FitError&) {
    return delta;
  }
}

double lorentzian_overlap_integral(const LorentzianFit& fit, double delta) {
  return fit.amplitude * fit.amplitude * delta / (kPi * fit.gamma);
}

double histogram_overlap_integral(const LdosHistogram& h) {
  double s = 0.0;
  for (double d : h.density) s += d * d;
  return s * h.bin_width / h.delta;
}

double golden_rule_gamma(double sigma_l, double delta) {
  if (!(delta > 0.0)) throw DomainError("golden_rule_gamma: Delta must be positive");
  return sigma_l * sigma_l / delta;
}

double saturation_predict(double gamma, double delta, std::size_t n, double bandwidth) {
  if (!(gamma > 0.0) || !(delta > 0.0) || n == 0 || !(bandwidth > 0.0)) {
    throw DomainError("saturation_predict: all arguments must be positive");
  }
  const double r = delta / (kPi * gamma);
  return std::max(r * r, 1.0 / static_cast<double>(n));
}

}  // namespace loschmidt::spectral
