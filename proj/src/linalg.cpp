#include "loschmidt/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "loschmidt/errors.hpp"

namespace loschmidt {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw SizeError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

ComplexVector::ComplexVector(std::vector<Complex> entries) : entries_(std::move(entries)) {
  if (!all_finite()) throw DomainError("ComplexVector: non-finite entry");
}

ComplexVector::ComplexVector(std::initializer_list<Complex> entries)
    : ComplexVector(std::vector<Complex>(entries)) {}

ComplexVector ComplexVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw SizeError("basis index out of range");
  ComplexVector v(dim);
  v[index] = 1.0;
  return v;
}

double ComplexVector::norm() const noexcept {
  double s = 0.0;
  for (const auto& z : entries_) s += std::norm(z);
  return std::sqrt(s);
}

bool ComplexVector::all_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), finite);
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& rhs) {
  require_same_dim(dim(), rhs.dim());
  for (std::size_t i = 0; i < dim(); ++i) entries_[i] += rhs.entries_[i];
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& rhs) {
  require_same_dim(dim(), rhs.dim());
  for (std::size_t i = 0; i < dim(); ++i) entries_[i] -= rhs.entries_[i];
  return *this;
}

ComplexVector& ComplexVector::operator*=(Complex s) noexcept {
  for (auto& z : entries_) z *= s;
  return *this;
}

ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }
ComplexVector operator*(Complex s, ComplexVector v) { return v *= s; }

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  require_same_dim(a.size(), b.size());
  // split real/imag accumulation; std::complex multiply is slow without -ffast-math
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
  require_same_dim(a.dim(), b.dim());
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> d) {
  ComplexMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::from_rows(
    std::initializer_list<std::initializer_list<Complex>> rows) {
  ComplexMatrix m(rows.size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    require_same_dim(row.size(), rows.size());
    std::size_t c = 0;
    for (const auto& z : row) m(r, c++) = z;
    ++r;
  }
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(n_);
  for (std::size_t c = 0; c < n_; ++c)
    for (std::size_t r = 0; r < n_; ++r) m(c, r) = std::conj((*this)(r, c));
  return m;
}

ComplexVector ComplexMatrix::apply(const ComplexVector& v) const {
  ComplexVector out(n_);
  apply(v.entries(), out.entries());
  return out;
}

void ComplexMatrix::apply(std::span<const Complex> in, std::span<Complex> out) const {
  require_same_dim(in.size(), n_);
  require_same_dim(out.size(), n_);
  std::vector<double> re(n_, 0.0), im(n_, 0.0);
  for (std::size_t c = 0; c < n_; ++c) {
    const double xr = in[c].real(), xi = in[c].imag();
    const Complex* col = data_.data() + c * n_;
    for (std::size_t r = 0; r < n_; ++r) {
      const double ar = col[r].real(), ai = col[r].imag();
      re[r] += ar * xr - ai * xi;
      im[r] += ar * xi + ai * xr;
    }
  }
  for (std::size_t r = 0; r < n_; ++r) out[r] = {re[r], im[r]};
}

void ComplexMatrix::apply_adjoint(std::span<const Complex> in, std::span<Complex> out) const {
  require_same_dim(in.size(), n_);
  require_same_dim(out.size(), n_);
  for (std::size_t c = 0; c < n_; ++c) out[c] = inner(column(c), in);
}

double ComplexMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::hermiticity_defect() const noexcept {
  double m = 0.0;
  for (std::size_t c = 0; c < n_; ++c)
    for (std::size_t r = 0; r <= c; ++r)
      m = std::max(m, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), finite);
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_dim(n_, rhs.n_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_dim(n_, rhs.n_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) noexcept {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a.dim(), b.dim());
  const std::size_t n = a.dim();
  ComplexMatrix c(n);
  for (std::size_t j = 0; j < n; ++j) a.apply(b.column(j), c.column(j));
  return c;
}

double unitarity_defect(const ComplexMatrix& u) {
  const std::size_t n = u.dim();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      Complex g = inner(u.column(i), u.column(j));
      if (i == j) g -= 1.0;
      s += std::norm(g);
    }
  }
  return std::sqrt(s);
}

}  // namespace loschmidt
