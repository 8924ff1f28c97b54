#include <cmath>
#include <numbers>

#include "loschmidt/errors.hpp"
#include "loschmidt/numkernel.hpp"

namespace loschmidt::numkernel {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n), log2n_(0), scale_(0.0) {
  if (!is_power_of_two(n)) {
    throw SizeError("fft: size " + std::to_string(n) + " is not a power of two");
  }
  while ((std::size_t{1} << log2n_) < n) ++log2n_;
  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (unsigned b = 0; b < log2n_; ++b) r |= ((i >> b) & 1u) << (log2n_ - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = {std::cos(phase), std::sin(phase)};
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(n));
}

void FftPlan::transform(std::span<Complex> data, FftDirection dir) const {
  if (data.size() != n_) {
    throw SizeError("fft: plan size " + std::to_string(n_) + " applied to vector of size " +
                    std::to_string(data.size()));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = dir == FftDirection::forward ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex w = twiddle_[k * stride];
        const double wr = w.real(), wi = sign * w.imag();
        Complex& a = data[start + k];
        Complex& b = data[start + k + half];
        const double br = b.real() * wr - b.imag() * wi;
        const double bi = b.real() * wi + b.imag() * wr;
        const double ar = a.real(), ai = a.imag();
        a = {ar + br, ai + bi};
        b = {ar - br, ai - bi};
      }
    }
  }
  for (auto& z : data) z *= scale_;
}

ComplexVector fft(const ComplexVector& v, FftDirection dir) {
  FftPlan plan(v.dim());
  ComplexVector out = v;
  plan.transform(out.entries(), dir);
  return out;
}

}  // namespace loschmidt::numkernel
