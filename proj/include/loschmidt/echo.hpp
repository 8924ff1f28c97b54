#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "loschmidt/linalg.hpp"
#include "loschmidt/models.hpp"
#include "loschmidt/numkernel.hpp"

namespace loschmidt::echo {

enum class Generator { h1, h2 };
enum class EchoKind { loschmidt, davidson };

const char* to_string(EchoKind kind) noexcept;

struct Fraction {
  long num = 1;
  long den = 1;
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

// sign -1 evolves forward, exp(-i H f t); sign +1 evolves backward.
struct Segment {
  Generator generator;
  int sign;
  Fraction fraction;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Segments in application order: segments.front() acts on |psi> first.
struct PulseSequence {
  std::vector<Segment> segments;
  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;
};

PulseSequence canonical_sequence(EchoKind kind);
// Operator adjoint: order reversed and every sign flipped. Its amplitude is
// the complex conjugate of the original.
PulseSequence adjoint(const PulseSequence& seq);
PulseSequence swap_generators(const PulseSequence& seq);

// <psi| (product of segments) |psi> with fraction f of n kicks applied as
// f*n Floquet periods. Non-integer f*n is rejected.
Complex amplitude_floquet(const PulseSequence& seq, const models::KickedRotatorPair& maps,
                          const ComplexVector& psi, long n);

// Continuous-time evolution with cached eigendecompositions of H1 and H2.
class ContinuousEcho {
 public:
  explicit ContinuousEcho(const models::HermitianPair& pair);

  std::size_t dim() const noexcept { return p1_.dim(); }
  const numkernel::ExactPropagator& propagator(Generator g) const noexcept {
    return g == Generator::h1 ? p1_ : p2_;
  }
  Complex amplitude(const PulseSequence& seq, const ComplexVector& psi, double t) const;

 private:
  numkernel::ExactPropagator p1_;
  numkernel::ExactPropagator p2_;
};

Complex amplitude_ct(const PulseSequence& seq, const models::HermitianPair& pair,
                     const ComplexVector& psi, double t);

// Floquet pair in the eigenbasis of U1: every power of either map costs one
// O(N^2) basis change, independent of the kick count.
class SpectralFloquet {
 public:
  SpectralFloquet(const numkernel::EigenSystem& u1, const numkernel::EigenSystem& u2);
  explicit SpectralFloquet(const models::KickedRotatorPair& maps);

  std::size_t dim() const noexcept { return theta_.size(); }
  const std::vector<double>& u_phases() const noexcept { return theta_; }
  const std::vector<double>& v_phases() const noexcept { return phi_; }
  // C = Q1^dagger Q2, column v holds <u|v> over u
  const ComplexMatrix& overlaps() const noexcept { return c_; }
  const ComplexMatrix& u_basis() const noexcept { return q1_; }

  // c_u = <u|psi>
  ComplexVector to_u_basis(const ComplexVector& psi) const;
  // amplitude for u-basis coefficients
  Complex amplitude(EchoKind kind, const ComplexVector& coeff, long n) const;

 private:
  void power_u2(std::span<const Complex> in, std::span<Complex> out, long n) const;

  std::vector<double> theta_;
  std::vector<double> phi_;
  ComplexMatrix q1_;
  ComplexMatrix c_;
};

struct ShortTimeRates {
  double sigma_l;
  double sigma_da;
};

ShortTimeRates short_time_rates(const models::HermitianPair& pair, const ComplexVector& psi);
ShortTimeRates short_time_rates(const models::PerturbationOperators& ops, const ComplexVector& psi);

struct EchoCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderr_;  // empty when not available
  EchoKind kind = EchoKind::loschmidt;

  std::size_t size() const noexcept { return times.size(); }
  bool has_stderr() const noexcept { return !stderr_.empty(); }
};

enum class Backend { floquet, ct };

using EchoInstance = std::variant<const models::KickedRotatorPair*, const SpectralFloquet*,
                                  const ContinuousEcho*>;

// Intensities |m(t)|^2 on an ascending grid starting at 0. For Floquet
// instances the times are kick counts and the states at earlier times are
// reused. Throws DomainError when `backend` does not match the instance.
EchoCurve echo_curve(Backend backend, EchoInstance instance, const ComplexVector& psi,
                     EchoKind kind, const std::vector<double>& times);

EchoCurve echo_curve(const models::KickedRotatorPair& maps, const ComplexVector& psi,
                     EchoKind kind, const std::vector<double>& times);
EchoCurve echo_curve(const SpectralFloquet& spectral, const ComplexVector& psi, EchoKind kind,
                     const std::vector<double>& times);
EchoCurve echo_curve(const ContinuousEcho& ct, const ComplexVector& psi, EchoKind kind,
                     const std::vector<double>& times);

// Full complex amplitudes on the same grids (intensities are |.|^2).
std::vector<Complex> amplitude_series(const models::KickedRotatorPair& maps,
                                      const ComplexVector& psi, EchoKind kind,
                                      const std::vector<long>& kicks);
std::vector<Complex> amplitude_series(const SpectralFloquet& spectral, const ComplexVector& psi,
                                      EchoKind kind, const std::vector<long>& kicks);

}  // namespace loschmidt::echo
