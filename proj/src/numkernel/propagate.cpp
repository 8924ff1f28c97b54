#include <cmath>

#include "loschmidt/errors.hpp"
#include "loschmidt/numkernel.hpp"

namespace loschmidt::numkernel {

ExactPropagator::ExactPropagator(const ComplexMatrix& h) : eig_(hermitian_eig(h)) {}

ExactPropagator::ExactPropagator(EigenSystem eig) : eig_(std::move(eig)) {}

ComplexVector ExactPropagator::apply(double t, const ComplexVector& v) const {
  const std::size_t n = dim();
  if (v.dim() != n) {
    throw SizeError("propagate: state dimension " + std::to_string(v.dim()) +
                    " does not match operator dimension " + std::to_string(n));
  }
  ComplexVector coeff(n);
  eig_.vectors.apply_adjoint(v.entries(), coeff.entries());
  for (std::size_t k = 0; k < n; ++k) coeff[k] *= std::polar(1.0, -eig_.values[k] * t);
  ComplexVector out(n);
  eig_.vectors.apply(coeff.entries(), out.entries());
  return out;
}

ComplexMatrix ExactPropagator::matrix(double t) const {
  const std::size_t n = dim();
  ComplexMatrix scaled = eig_.vectors;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex ph = std::polar(1.0, -eig_.values[k] * t);
    for (auto& z : scaled.column(k)) z *= ph;
  }
  return scaled * eig_.vectors.adjoint();
}

ComplexVector propagate_exact(const ComplexMatrix& h, double t, const ComplexVector& v) {
  if (v.dim() != h.dim()) {
    throw SizeError("propagate_exact: state dimension " + std::to_string(v.dim()) +
                    " does not match operator dimension " + std::to_string(h.dim()));
  }
  return ExactPropagator(h).apply(t, v);
}

ComplexMatrix densify(const LinearOperator& op, std::size_t n) {
  if (n == 0) throw SizeError("densify: zero dimension");
  ComplexMatrix m(n);
  for (std::size_t j = 0; j < n; ++j) {
    const ComplexVector col = op(ComplexVector::basis(n, j));
    if (col.dim() != n) {
      throw SizeError("densify: operator returned dimension " + std::to_string(col.dim()) +
                      ", expected " + std::to_string(n));
    }
    std::copy_n(col.data(), n, m.column(j).begin());
  }
  return m;
}

}  // namespace loschmidt::numkernel
