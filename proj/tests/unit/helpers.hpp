#pragma once
#include <cmath>
#include <numbers>

#include "loschmidt/linalg.hpp"
#include "loschmidt/random.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;

inline loschmidt::ComplexVector random_vector(std::size_t n, std::uint64_t seed) {
  loschmidt::Rng rng(seed);
  loschmidt::ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {rng.normal(), rng.normal()};
  return v;
}

inline double max_abs_diff(const loschmidt::ComplexMatrix& a, const loschmidt::ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

}  // namespace testing
