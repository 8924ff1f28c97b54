#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace loschmidt {

using Complex = std::complex<double>;

// Dense complex vector. Entries are finite when constructed from data;
// mutable access is provided for in-place kernels.
class ComplexVector {
 public:
  ComplexVector() = default;
  explicit ComplexVector(std::size_t dim) : entries_(dim) {}
  explicit ComplexVector(std::vector<Complex> entries);
  ComplexVector(std::initializer_list<Complex> entries);

  static ComplexVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return entries_.size(); }
  Complex operator[](std::size_t i) const { return entries_[i]; }
  Complex& operator[](std::size_t i) { return entries_[i]; }
  std::span<const Complex> entries() const noexcept { return entries_; }
  std::span<Complex> entries() noexcept { return entries_; }
  Complex* data() noexcept { return entries_.data(); }
  const Complex* data() const noexcept { return entries_.data(); }

  double norm() const noexcept;
  bool all_finite() const noexcept;

  ComplexVector& operator+=(const ComplexVector& rhs);
  ComplexVector& operator-=(const ComplexVector& rhs);
  ComplexVector& operator*=(Complex s) noexcept;

  friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

 private:
  std::vector<Complex> entries_;
};

ComplexVector operator+(ComplexVector a, const ComplexVector& b);
ComplexVector operator-(ComplexVector a, const ComplexVector& b);
ComplexVector operator*(Complex s, ComplexVector v);

// <a|b> = sum conj(a_i) b_i
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
inline Complex inner(const ComplexVector& a, const ComplexVector& b) {
  return inner(a.entries(), b.entries());
}
double max_abs_diff(const ComplexVector& a, const ComplexVector& b);

// Square complex matrix, column-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {}

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const Complex> d);
  // Row-major nested initializer, convenient for small analytic cases.
  static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

  std::size_t dim() const noexcept { return n_; }
  Complex operator()(std::size_t r, std::size_t c) const { return data_[c * n_ + r]; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[c * n_ + r]; }
  std::span<Complex> column(std::size_t c) { return {data_.data() + c * n_, n_}; }
  std::span<const Complex> column(std::size_t c) const { return {data_.data() + c * n_, n_}; }
  std::span<const Complex> raw() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  ComplexVector apply(const ComplexVector& v) const;
  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  // out = A^dagger in
  void apply_adjoint(std::span<const Complex> in, std::span<Complex> out) const;

  double frobenius_norm() const noexcept;
  // max_ij |A_ij - conj(A_ji)|
  double hermiticity_defect() const noexcept;
  bool all_finite() const noexcept;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex s) noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

// || U^dagger U - I ||_F
double unitarity_defect(const ComplexMatrix& u);

}  // namespace loschmidt
