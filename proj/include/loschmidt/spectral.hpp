#pragma once

#include <vector>

#include "loschmidt/linalg.hpp"
#include "loschmidt/numkernel.hpp"

namespace loschmidt::spectral {

// weights(u, v) = |<u|v>|^2 with eigenphases of both bases.
struct OverlapMatrix {
  std::size_t n = 0;
  std::vector<double> weights;  // row-major over u
  std::vector<double> u_phases;
  std::vector<double> v_phases;

  double operator()(std::size_t u, std::size_t v) const { return weights[u * n + v]; }
  // max over rows and columns of |sum - 1|
  double stochasticity_defect() const;
};

OverlapMatrix overlap_matrix(const numkernel::EigenSystem& u1, const numkernel::EigenSystem& u2);
// From precomputed complex overlaps c(u, v) = <u|v>.
OverlapMatrix overlap_matrix(const ComplexMatrix& c, std::vector<double> u_phases,
                             std::vector<double> v_phases);
// c(u, v) = <u|v>, i.e. Q1^dagger Q2
ComplexMatrix overlap_amplitudes(const numkernel::EigenSystem& u1, const numkernel::EigenSystem& u2);

// (1/N) sum_{u,v} |<u|v>|^4
double mda_saturation_oracle(const OverlapMatrix& ov);

// Time-averaged Loschmidt echo for a state with u-basis coefficients
// coeff, from complex overlaps c(u, v) = <u|v>. Assumes non-degenerate
// phase differences.
inline constexpr std::size_t kMlSaturationMaxN = 64;
inline constexpr std::size_t kMlSaturationLiteralMaxN = 32;
double ml_saturation_sum(const ComplexMatrix& c, const ComplexVector& coeff);
// The quadruple sum written out term by term (cross-check, N <= 32).
double ml_saturation_sum_literal(const ComplexMatrix& c, const ComplexVector& coeff);
// Exact Haar average of ml_saturation_sum: (N + sum w^2) / (N (N + 1)).
double ml_saturation_haar_mean(const OverlapMatrix& ov);

// Signed distance a - b wrapped to (-pi, pi].
double wrapped_difference(double a, double b);

struct LdosHistogram {
  double bin_width = 0.0;
  double delta = 0.0;  // mean level spacing 2 pi / N
  std::vector<double> bin_centers;
  std::vector<double> density;  // mean weight per bin, 0 for empty bins
  std::vector<std::size_t> counts;

  // sum density * bin_width / delta
  double normalization() const;
};

// Bins E_u - E_v (wrapped) with centres k * bin_width, k symmetric around 0.
LdosHistogram ldos_histogram(const OverlapMatrix& ov, double bin_width);
// max(Delta, Gamma_init / 10) with Gamma_init read off a Delta-wide histogram.
double default_bin_width(const OverlapMatrix& ov);

// Exact bin averages of (Delta/pi)(Gamma/2)/(E^2 + Gamma^2/4) on a grid of
// width bin_width covering (-pi, pi].
LdosHistogram synthetic_lorentzian(double gamma, double delta, double bin_width);

struct LorentzianFit {
  double gamma = 0.0;      // full width at half maximum
  double amplitude = 0.0;  // multiplies the normalized Lorentzian
  double rms_residual = 0.0;
  double relative_rms = 0.0;  // rms_residual / peak density
  double gamma_init = 0.0;
  double window = 0.0;  // fit used |E| <= window
  std::size_t bins_used = 0;
};

// Full width from the half-height crossings of the central peak. Throws
// FitError(no_peak) for flat or unresolved input.
double half_height_width(const LdosHistogram& h);

// Least squares on bin-averaged Lorentzian densities over
// |E| <= min(pi/2, 20 Gamma_init).
LorentzianFit lorentzian_fit(const LdosHistogram& h);

// Bin average of the model at centre e.
double lorentzian_bin_average(double e, double bin_width, double gamma, double delta);

// (1/Delta) * integral rho^2 dE of the fitted Lorentzian: amplitude^2 Delta / (pi Gamma).
double lorentzian_overlap_integral(const LorentzianFit& fit, double delta);
// (1/Delta) * sum density^2 * bin_width straight from the histogram.
double histogram_overlap_integral(const LdosHistogram& h);

double golden_rule_gamma(double sigma_l, double delta);
double saturation_predict(double gamma, double delta, std::size_t n, double bandwidth);

}  // namespace loschmidt::spectral
