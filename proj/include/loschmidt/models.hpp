#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "loschmidt/linalg.hpp"
#include "loschmidt/numkernel.hpp"

namespace loschmidt::models {

enum class TimeDirection { forward, backward };

// Where the integer grid index starts. The two choices differ only in the
// kinetic phase of momentum bin 0 (index N instead of 0).
enum class GridOrigin { zero, one };

// One period of the quantized kicked rotator on the torus,
//   U = exp(-i tau p^2 / (2 hbar)) exp(-i K cos(x) / hbar),  hbar = 1/N,
// with x_l = 2 pi (l + theta_x) / N and p_m = 2 pi (m + theta_p) / N.
// States live in the position representation.
class KickedRotatorMap {
 public:
  KickedRotatorMap(std::size_t n, double k, double tau = 1.0, double theta_x = 0.0,
                   double theta_p = 0.0, GridOrigin origin = GridOrigin::zero);
  // Same physics on a caller-supplied plan, so paired maps share twiddles.
  KickedRotatorMap(std::shared_ptr<const numkernel::FftPlan> plan, double k, double tau,
                   double theta_x, double theta_p, GridOrigin origin);

  std::size_t n() const noexcept { return n_; }
  double k() const noexcept { return k_; }
  double tau() const noexcept { return tau_; }
  double hbar_eff() const noexcept { return 1.0 / static_cast<double>(n_); }
  double theta_x() const noexcept { return theta_x_; }
  double theta_p() const noexcept { return theta_p_; }
  GridOrigin origin() const noexcept { return origin_; }
  const std::shared_ptr<const numkernel::FftPlan>& plan() const noexcept { return plan_; }

  void apply_inplace(std::span<Complex> v, TimeDirection dir) const;
  ComplexVector apply(const ComplexVector& v, TimeDirection dir) const;
  // n periods (negative n runs backward)
  void power_inplace(std::span<Complex> v, long n) const;
  ComplexMatrix dense() const;

 private:
  void build_phases();

  std::size_t n_;
  double k_, tau_, theta_x_, theta_p_;
  GridOrigin origin_;
  std::shared_ptr<const numkernel::FftPlan> plan_;
  std::vector<Complex> kick_;     // exp(-i K N cos x_l)
  std::vector<Complex> kinetic_;  // exp(-i tau N p_m^2 / 2), indexed by FFT bin
  std::vector<Complex> bloch_;    // exp(-2 pi i l theta_p / N); empty when theta_p = 0
};

ComplexVector kr_apply(const KickedRotatorMap& map, const ComplexVector& v, TimeDirection dir);

struct KickedRotatorPair {
  KickedRotatorMap u1;
  KickedRotatorMap u2;
  double delta_k() const noexcept { return u2.k() - u1.k(); }
};

KickedRotatorPair kr_pair(std::size_t n, double k1, double delta_k, double tau = 1.0,
                          double theta_x = 0.0, double theta_p = 0.0,
                          GridOrigin origin = GridOrigin::zero);

struct HermitianPair {
  ComplexMatrix h1;
  ComplexMatrix h2;
  double epsilon = 0.0;
  ComplexMatrix v;                // H2 = H1 + epsilon * V
  double perturbation_norm = 0.0; // ||H2 - H1||_F at construction
  std::size_t dim() const noexcept { return h1.dim(); }
};

// Validates Hermiticity and records ||H2 - H1||_F; V is set to H2 - H1 and
// epsilon to 1.
HermitianPair make_pair(ComplexMatrix h1, ComplexMatrix h2);

// Seeded Gaussian Hermitian H1 scaled to unit mean level spacing at the band
// centre (semicircle radius 2N/pi), plus an independent Gaussian Hermitian V
// with ||V||_F^2 = N.
HermitianPair ct_pair(std::size_t n, double epsilon, std::uint64_t seed);

// Gaussian Hermitian (G + G^dagger)/2 with E|g|^2 = 1, unscaled.
ComplexMatrix gaussian_hermitian(std::size_t n, std::uint64_t seed);

struct PerturbationOperators {
  ComplexMatrix sigma_l;   // H1 - H2
  ComplexMatrix sigma_da;  // (i/4)[H1, H2]
};

PerturbationOperators perturbation_operators(const HermitianPair& pair);

struct SpectralScales {
  double bandwidth;
  double delta;
};

inline SpectralScales floquet_scales(std::size_t n) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  return {two_pi, two_pi / static_cast<double>(n)};
}

// Per-kick phase perturbation of a kicked-rotator pair is delta_k N cos x.
// Expressed as a level-spacing-weighted variance, sigma_L^2 = Delta * Var,
// so that sigma_L^2 / Delta is the golden-rule width (delta_k N)^2 / 2.
double floquet_sigma_l_squared(std::size_t n, double delta_k);

}  // namespace loschmidt::models
