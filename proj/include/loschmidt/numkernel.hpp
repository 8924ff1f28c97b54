#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "loschmidt/linalg.hpp"

namespace loschmidt::numkernel {

enum class FftDirection { forward, inverse };

bool is_power_of_two(std::size_t n) noexcept;

// Radix-2 plan with unitary normalization (1/sqrt(N) in both directions).
// Immutable after construction; one plan may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void transform(std::span<Complex> data, FftDirection dir) const;

 private:
  std::size_t n_;
  unsigned log2n_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;  // exp(-2 pi i k / n), k < n/2
  double scale_;
};

ComplexVector fft(const ComplexVector& v, FftDirection dir);

struct EigenSystem {
  // Ascending eigenvalues (Hermitian input) or eigenphases theta in [0, 2pi)
  // with eigenvalue exp(-i theta) (unitary input).
  std::vector<double> values;
  ComplexMatrix vectors;  // column k pairs with values[k]
  double residual = 0.0;  // max_k || A v_k - lambda_k v_k ||

  std::size_t dim() const noexcept { return values.size(); }
};

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr int kMaxJacobiSweeps = 100;
inline constexpr double kJacobiRelativeOffNorm = 1e-12;
inline constexpr double kDegeneracyThreshold = 1e-8;
inline constexpr std::size_t kMaxEigenDimension = 2048;

// Cyclic complex Jacobi. Throws DomainError for non-Hermitian input and
// ConvergenceError (with the achieved off-diagonal norm) at the sweep cap.
EigenSystem hermitian_eig(const ComplexMatrix& a);

// Eigendecomposition of a unitary matrix through two Hermitian problems:
// (U + U^dagger)/2 first, then (U - U^dagger)/(2i) restricted to each
// near-degenerate eigenspace of the former.
EigenSystem unitary_eig(const ComplexMatrix& u);

// max_{j,k} |<v_j|v_k> - delta_jk|
double orthonormality_defect(const ComplexMatrix& vectors);

// e^{-iHt} via a cached eigendecomposition of H.
class ExactPropagator {
 public:
  explicit ExactPropagator(const ComplexMatrix& h);
  explicit ExactPropagator(EigenSystem eig);

  std::size_t dim() const noexcept { return eig_.dim(); }
  const EigenSystem& eigensystem() const noexcept { return eig_; }
  ComplexVector apply(double t, const ComplexVector& v) const;
  // Dense Q e^{-i Lambda t} Q^dagger.
  ComplexMatrix matrix(double t) const;

 private:
  EigenSystem eig_;
};

ComplexVector propagate_exact(const ComplexMatrix& h, double t, const ComplexVector& v);

using LinearOperator = std::function<ComplexVector(const ComplexVector&)>;

// Column j of the result is op(e_j).
ComplexMatrix densify(const LinearOperator& op, std::size_t n);

}  // namespace loschmidt::numkernel
