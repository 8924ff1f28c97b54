#include "loschmidt/echo.hpp"

#include <cmath>

#include "loschmidt/errors.hpp"

namespace loschmidt::echo {

using models::KickedRotatorPair;
using models::TimeDirection;

const char* to_string(EchoKind kind) noexcept {
  return kind == EchoKind::loschmidt ? "M_L" : "M_Da";
}

PulseSequence canonical_sequence(EchoKind kind) {
  if (kind == EchoKind::loschmidt) {
    return {{{Generator::h1, -1, {1, 1}}, {Generator::h2, +1, {1, 1}}}};
  }
  return {{{Generator::h1, -1, {1, 2}},
           {Generator::h2, -1, {1, 2}},
           {Generator::h1, +1, {1, 2}},
           {Generator::h2, +1, {1, 2}}}};
}

PulseSequence adjoint(const PulseSequence& seq) {
  PulseSequence out;
  out.segments.assign(seq.segments.rbegin(), seq.segments.rend());
  for (auto& s : out.segments) s.sign = -s.sign;
  return out;
}

PulseSequence swap_generators(const PulseSequence& seq) {
  PulseSequence out = seq;
  for (auto& s : out.segments) s.generator = s.generator == Generator::h1 ? Generator::h2 : Generator::h1;
  return out;
}

namespace {

void check_sequence(const PulseSequence& seq) {
  for (const auto& s : seq.segments) {
    if (s.sign != 1 && s.sign != -1) throw DomainError("pulse sequence: sign must be +1 or -1");
    if (s.fraction.den <= 0 || s.fraction.num < 0) {
      throw DomainError("pulse sequence: fractions must be nonnegative with positive denominator");
    }
  }
}

void check_state(const ComplexVector& psi, std::size_t n) {
  if (psi.dim() != n) {
    throw SizeError("echo: state dimension " + std::to_string(psi.dim()) +
                    " does not match instance dimension " + std::to_string(n));
  }
}

long segment_kicks(const Segment& s, long n) {
  const long scaled = s.fraction.num * n;
  if (scaled % s.fraction.den != 0) {
    throw DomainError("amplitude_floquet: fraction " + std::to_string(s.fraction.num) + "/" +
                      std::to_string(s.fraction.den) + " of n=" + std::to_string(n) +
                      " kicks is not an integer (half-time sequences need even n)");
  }
  return scaled / s.fraction.den;
}

void check_kicks(const std::vector<long>& kicks, EchoKind kind) {
  long previous = -1;
  for (long n : kicks) {
    if (n < 0) throw DomainError("echo: negative kick count");
    if (n < previous) throw DomainError("echo: kick counts must be ascending");
    if (kind == EchoKind::davidson && n % 2 != 0) {
      throw DomainError("echo: M_Da needs even kick counts, got " + std::to_string(n));
    }
    previous = n;
  }
}

std::vector<long> to_kicks(const std::vector<double>& times) {
  std::vector<long> kicks;
  kicks.reserve(times.size());
  for (double t : times) {
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) throw DomainError("echo: Floquet times must be integer kick counts");
    kicks.push_back(static_cast<long>(r));
  }
  return kicks;
}

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw DomainError("echo_curve: empty time grid");
  if (times.front() != 0.0) throw DomainError("echo_curve: time grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw DomainError("echo_curve: time grid must be ascending");
}

EchoCurve to_curve(const std::vector<double>& times, const std::vector<Complex>& amps, EchoKind kind) {
  EchoCurve curve;
  curve.kind = kind;
  curve.times = times;
  curve.values.reserve(amps.size());
  for (const Complex& m : amps) curve.values.push_back(std::norm(m));
  return curve;
}

}  // namespace

Complex amplitude_floquet(const PulseSequence& seq, const KickedRotatorPair& maps,
                          const ComplexVector& psi, long n) {
  check_sequence(seq);
  check_state(psi, maps.u1.n());
  if (n < 0) throw DomainError("amplitude_floquet: negative kick count");
  std::vector<long> counts;
  for (const auto& s : seq.segments) counts.push_back(segment_kicks(s, n));
  ComplexVector state = psi;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const auto& s = seq.segments[i];
    const auto& map = s.generator == Generator::h1 ? maps.u1 : maps.u2;
    map.power_inplace(state.entries(), s.sign < 0 ? counts[i] : -counts[i]);
  }
  return inner(psi, state);
}

ContinuousEcho::ContinuousEcho(const models::HermitianPair& pair) : p1_(pair.h1), p2_(pair.h2) {}

Complex ContinuousEcho::amplitude(const PulseSequence& seq, const ComplexVector& psi, double t) const {
  check_sequence(seq);
  check_state(psi, dim());
  if (!(t >= 0.0)) throw DomainError("amplitude_ct: time must be nonnegative");
  ComplexVector state = psi;
  for (const auto& s : seq.segments) {
    const double dt = -static_cast<double>(s.sign) * s.fraction.value() * t;
    state = propagator(s.generator).apply(dt, state);
  }
  return inner(psi, state);
}

Complex amplitude_ct(const PulseSequence& seq, const models::HermitianPair& pair,
                     const ComplexVector& psi, double t) {
  return ContinuousEcho(pair).amplitude(seq, psi, t);
}

SpectralFloquet::SpectralFloquet(const numkernel::EigenSystem& u1, const numkernel::EigenSystem& u2)
    : theta_(u1.values), phi_(u2.values), q1_(u1.vectors) {
  if (u1.dim() != u2.dim()) throw SizeError("SpectralFloquet: dimension mismatch");
  c_ = q1_.adjoint() * u2.vectors;
}

SpectralFloquet::SpectralFloquet(const KickedRotatorPair& maps)
    : SpectralFloquet(numkernel::unitary_eig(maps.u1.dense()), numkernel::unitary_eig(maps.u2.dense())) {}

ComplexVector SpectralFloquet::to_u_basis(const ComplexVector& psi) const {
  check_state(psi, dim());
  ComplexVector out(dim());
  q1_.apply_adjoint(psi.entries(), out.entries());
  return out;
}

void SpectralFloquet::power_u2(std::span<const Complex> in, std::span<Complex> out, long n) const {
  const std::size_t d = dim();
  std::vector<Complex> tmp(d);
  c_.apply_adjoint(in, tmp);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) tmp[k] *= std::polar(1.0, -nd * phi_[k]);
  c_.apply(tmp, out);
}

Complex SpectralFloquet::amplitude(EchoKind kind, const ComplexVector& coeff, long n) const {
  check_state(coeff, dim());
  if (n < 0) throw DomainError("SpectralFloquet: negative kick count");
  const std::size_t d = dim();
  auto phase_u1 = [&](std::span<Complex> v, long k) {
    const double kd = static_cast<double>(k);
    for (std::size_t i = 0; i < d; ++i) v[i] *= std::polar(1.0, -kd * theta_[i]);
  };
  if (kind == EchoKind::loschmidt) {
    ComplexVector a = coeff;
    phase_u1(a.entries(), n);
    ComplexVector b(d);
    power_u2(coeff.entries(), b.entries(), n);
    return inner(b, a);
  }
  if (n % 2 != 0) throw DomainError("SpectralFloquet: M_Da needs an even kick count");
  const long s = n / 2;
  ComplexVector x = coeff;
  phase_u1(x.entries(), s);
  ComplexVector forward(d);  // U2^s U1^s psi
  power_u2(x.entries(), forward.entries(), s);
  ComplexVector swapped(d);  // U1^s U2^s psi
  power_u2(coeff.entries(), swapped.entries(), s);
  phase_u1(swapped.entries(), s);
  return inner(swapped, forward);
}

ShortTimeRates short_time_rates(const models::PerturbationOperators& ops, const ComplexVector& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw DomainError("short_time_rates: state must be normalized");
  auto variance = [&](const ComplexMatrix& sigma, const char* name) {
    check_state(psi, sigma.dim());
    const ComplexVector s = sigma.apply(psi);
    const double mean = inner(psi, s).real();
    const double second = inner(s, s).real();
    double var = second - mean * mean;
    if (var < 0.0) {
      if (var < -1e-12) {
        throw NumericalError(std::string("short_time_rates: negative variance of ") + name + " (" +
                             std::to_string(var) + ")");
      }
      var = 0.0;
    }
    return var;
  };
  const double vl = variance(ops.sigma_l, "Sigma_L");
  const double vda = variance(ops.sigma_da, "Sigma_Da");
  return {std::sqrt(vl), std::sqrt(std::sqrt(vda))};
}

ShortTimeRates short_time_rates(const models::HermitianPair& pair, const ComplexVector& psi) {
  return short_time_rates(models::perturbation_operators(pair), psi);
}

std::vector<Complex> amplitude_series(const KickedRotatorPair& maps, const ComplexVector& psi,
                                      EchoKind kind, const std::vector<long>& kicks) {
  check_state(psi, maps.u1.n());
  check_kicks(kicks, kind);
  std::vector<Complex> out;
  out.reserve(kicks.size());
  ComplexVector x = psi;  // U1^s psi
  ComplexVector y = psi;  // U2^s psi
  long s = 0;
  for (long n : kicks) {
    const long target = kind == EchoKind::loschmidt ? n : n / 2;
    for (; s < target; ++s) {
      maps.u1.apply_inplace(x.entries(), TimeDirection::forward);
      maps.u2.apply_inplace(y.entries(), TimeDirection::forward);
    }
    if (kind == EchoKind::loschmidt) {
      out.push_back(inner(y, x));
    } else {
      ComplexVector forward = x;
      maps.u2.power_inplace(forward.entries(), s);
      ComplexVector swapped = y;
      maps.u1.power_inplace(swapped.entries(), s);
      out.push_back(inner(swapped, forward));
    }
  }
  return out;
}

std::vector<Complex> amplitude_series(const SpectralFloquet& spectral, const ComplexVector& psi,
                                      EchoKind kind, const std::vector<long>& kicks) {
  check_kicks(kicks, kind);
  const ComplexVector coeff = spectral.to_u_basis(psi);
  std::vector<Complex> out;
  out.reserve(kicks.size());
  for (long n : kicks) out.push_back(spectral.amplitude(kind, coeff, n));
  return out;
}

EchoCurve echo_curve(const KickedRotatorPair& maps, const ComplexVector& psi, EchoKind kind,
                     const std::vector<double>& times) {
  check_times(times);
  return to_curve(times, amplitude_series(maps, psi, kind, to_kicks(times)), kind);
}

EchoCurve echo_curve(const SpectralFloquet& spectral, const ComplexVector& psi, EchoKind kind,
                     const std::vector<double>& times) {
  check_times(times);
  return to_curve(times, amplitude_series(spectral, psi, kind, to_kicks(times)), kind);
}

EchoCurve echo_curve(const ContinuousEcho& ct, const ComplexVector& psi, EchoKind kind,
                     const std::vector<double>& times) {
  check_times(times);
  const PulseSequence seq = canonical_sequence(kind);
  std::vector<Complex> amps;
  amps.reserve(times.size());
  for (double t : times) amps.push_back(ct.amplitude(seq, psi, t));
  return to_curve(times, amps, kind);
}

EchoCurve echo_curve(Backend backend, EchoInstance instance, const ComplexVector& psi,
                     EchoKind kind, const std::vector<double>& times) {
  const bool is_ct = std::holds_alternative<const ContinuousEcho*>(instance);
  if (is_ct != (backend == Backend::ct)) {
    throw DomainError("echo_curve: backend does not match the supplied instance");
  }
  return std::visit(
      [&](auto* inst) -> EchoCurve {
        if (inst == nullptr) throw DomainError("echo_curve: null instance");
        return echo_curve(*inst, psi, kind, times);
      },
      instance);
}

}  // namespace loschmidt::echo
