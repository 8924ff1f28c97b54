#include "loschmidt/models.hpp"

#include <cmath>
#include <numbers>

#include "loschmidt/errors.hpp"
#include "loschmidt/random.hpp"

namespace loschmidt::models {

using numkernel::FftDirection;
using numkernel::FftPlan;

namespace {

void check_parameters(double k, double tau, double theta_x, double theta_p) {
  if (!std::isfinite(k) || !std::isfinite(tau)) throw DomainError("kicked rotator: non-finite K or tau");
  if (tau <= 0.0) throw DomainError("kicked rotator: tau must be positive");
  if (!(theta_x >= 0.0 && theta_x < 1.0) || !(theta_p >= 0.0 && theta_p < 1.0)) {
    throw DomainError("kicked rotator: Bloch offsets must lie in [0, 1)");
  }
}

void multiply(std::span<Complex> v, const std::vector<Complex>& phase, bool conjugate) {
  const std::size_t n = v.size();
  if (conjugate) {
    for (std::size_t i = 0; i < n; ++i) v[i] *= std::conj(phase[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) v[i] *= phase[i];
  }
}

}  // namespace

KickedRotatorMap::KickedRotatorMap(std::size_t n, double k, double tau, double theta_x,
                                   double theta_p, GridOrigin origin)
    : KickedRotatorMap(std::make_shared<const FftPlan>(n), k, tau, theta_x, theta_p, origin) {}

KickedRotatorMap::KickedRotatorMap(std::shared_ptr<const FftPlan> plan, double k, double tau,
                                   double theta_x, double theta_p, GridOrigin origin)
    : n_(plan ? plan->size() : 0),
      k_(k),
      tau_(tau),
      theta_x_(theta_x),
      theta_p_(theta_p),
      origin_(origin),
      plan_(std::move(plan)) {
  if (!plan_) throw SizeError("kicked rotator: missing FFT plan");
  check_parameters(k, tau, theta_x, theta_p);
  build_phases();
}

void KickedRotatorMap::build_phases() {
  const double nd = static_cast<double>(n_);
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t shift = origin_ == GridOrigin::one ? 1 : 0;
  kick_.resize(n_);
  kinetic_.resize(n_);
  for (std::size_t bin = 0; bin < n_; ++bin) {
    // grid index represented by this storage slot
    const std::size_t l = bin == 0 && shift == 1 ? n_ : bin;
    const double x = two_pi * (static_cast<double>(l) + theta_x_) / nd;
    kick_[bin] = std::polar(1.0, -k_ * nd * std::cos(x));
    // tau p^2 / (2 hbar) = 2 pi^2 tau (m + theta_p)^2 / N; not periodic in m
    const double m = static_cast<double>(l) + theta_p_;
    kinetic_[bin] = std::polar(1.0, -tau_ * 2.0 * std::numbers::pi * std::numbers::pi * m * m / nd);
  }
  if (theta_p_ != 0.0) {
    bloch_.resize(n_);
    for (std::size_t l = 0; l < n_; ++l) {
      bloch_[l] = std::polar(1.0, -two_pi * static_cast<double>(l) * theta_p_ / nd);
    }
  }
}

void KickedRotatorMap::apply_inplace(std::span<Complex> v, TimeDirection dir) const {
  if (v.size() != n_) {
    throw SizeError("kr_apply: state dimension " + std::to_string(v.size()) +
                    " does not match map dimension " + std::to_string(n_));
  }
  const bool back = dir == TimeDirection::backward;
  if (!back) multiply(v, kick_, false);
  if (!bloch_.empty()) multiply(v, bloch_, false);
  plan_->transform(v, FftDirection::forward);
  multiply(v, kinetic_, back);
  plan_->transform(v, FftDirection::inverse);
  if (!bloch_.empty()) multiply(v, bloch_, true);
  if (back) multiply(v, kick_, true);
}

ComplexVector KickedRotatorMap::apply(const ComplexVector& v, TimeDirection dir) const {
  ComplexVector out = v;
  apply_inplace(out.entries(), dir);
  return out;
}

void KickedRotatorMap::power_inplace(std::span<Complex> v, long n) const {
  const TimeDirection dir = n >= 0 ? TimeDirection::forward : TimeDirection::backward;
  for (long i = 0, count = n >= 0 ? n : -n; i < count; ++i) apply_inplace(v, dir);
}

ComplexMatrix KickedRotatorMap::dense() const {
  return numkernel::densify([this](const ComplexVector& e) { return apply(e, TimeDirection::forward); },
                            n_);
}

ComplexVector kr_apply(const KickedRotatorMap& map, const ComplexVector& v, TimeDirection dir) {
  return map.apply(v, dir);
}

KickedRotatorPair kr_pair(std::size_t n, double k1, double delta_k, double tau, double theta_x,
                          double theta_p, GridOrigin origin) {
  if (!(delta_k >= 0.0)) throw DomainError("kr_pair: deltaK must be nonnegative");
  auto plan = std::make_shared<const FftPlan>(n);
  return {KickedRotatorMap(plan, k1, tau, theta_x, theta_p, origin),
          KickedRotatorMap(plan, k1 + delta_k, tau, theta_x, theta_p, origin)};
}

HermitianPair make_pair(ComplexMatrix h1, ComplexMatrix h2) {
  if (h1.dim() != h2.dim()) throw SizeError("make_pair: dimension mismatch");
  if (h1.hermiticity_defect() > numkernel::kHermitianTolerance ||
      h2.hermiticity_defect() > numkernel::kHermitianTolerance) {
    throw DomainError("make_pair: inputs must be Hermitian");
  }
  HermitianPair pair;
  pair.v = h2 - h1;
  pair.perturbation_norm = pair.v.frobenius_norm();
  pair.epsilon = 1.0;
  pair.h1 = std::move(h1);
  pair.h2 = std::move(h2);
  return pair;
}

ComplexMatrix gaussian_hermitian(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix g(n);
  const double s = std::sqrt(0.5);  // E|g|^2 = 1
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(r, c) = {s * re, s * im};
    }
  ComplexMatrix h(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) h(r, c) = 0.5 * (g(r, c) + std::conj(g(c, r)));
  return h;
}

HermitianPair ct_pair(std::size_t n, double epsilon, std::uint64_t seed) {
  if (n < 2) throw SizeError("ct_pair: N must be at least 2");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("ct_pair: epsilon must be >= 0");
  const double nd = static_cast<double>(n);
  ComplexMatrix h1 = gaussian_hermitian(n, derive_seed(seed, 0));
  h1 *= std::sqrt(2.0 * nd) / std::numbers::pi;
  ComplexMatrix v = gaussian_hermitian(n, derive_seed(seed, 1));
  v *= std::sqrt(nd) / v.frobenius_norm();

  HermitianPair pair;
  pair.epsilon = epsilon;
  pair.h2 = h1;
  if (epsilon != 0.0) pair.h2 += epsilon * v;
  pair.perturbation_norm = (pair.h2 - h1).frobenius_norm();
  pair.h1 = std::move(h1);
  pair.v = std::move(v);
  return pair;
}

PerturbationOperators perturbation_operators(const HermitianPair& pair) {
  ComplexMatrix product = pair.h1 * pair.h2;
  // (i/4)(C - C^dagger) with C = H1 H2 is Hermitian by construction
  ComplexMatrix commutator = product - product.adjoint();
  return {pair.h1 - pair.h2, Complex(0.0, 0.25) * commutator};
}

double floquet_sigma_l_squared(std::size_t n, double delta_k) {
  const double nd = static_cast<double>(n);
  const double variance = 0.5 * (delta_k * nd) * (delta_k * nd);
  return floquet_scales(n).delta * variance;
}

}  // namespace loschmidt::models
