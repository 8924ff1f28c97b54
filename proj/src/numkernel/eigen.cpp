#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "loschmidt/errors.hpp"
#include "loschmidt/numkernel.hpp"

namespace loschmidt::numkernel {

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  const std::size_t n = a.dim();
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r)
      if (r != c) s += std::norm(a(r, c));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p,q), p < q. Columns of `a` and
// `v` are updated contiguously; rows of `a` are restored from Hermiticity.
void rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const std::size_t n = a.dim();
  const Complex z = a(p, q);
  const double mag = std::abs(z);
  const Complex phase = z / mag;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on the (p, q) plane
  const Complex ephi_conj = std::conj(phase);

  auto col_p = a.column(p);
  auto col_q = a.column(q);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex xp = col_p[k];
    const Complex xq = col_q[k] * ephi_conj;
    col_p[k] = c * xp - s * xq;
    col_q[k] = s * xp + c * xq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    a(p, k) = std::conj(col_p[k]);
    a(q, k) = std::conj(col_q[k]);
  }
  a(p, p) = app - t * mag;
  a(q, q) = aqq + t * mag;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  auto vp = v.column(p);
  auto vq = v.column(q);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex xp = vp[k];
    const Complex xq = vq[k] * ephi_conj;
    vp[k] = c * xp - s * xq;
    vq[k] = s * xp + c * xq;
  }
}

// Residual max_k || A v_k - lambda_k v_k || for real eigenvalues.
double hermitian_residual(const ComplexMatrix& a, const std::vector<double>& values,
                          const ComplexMatrix& vectors) {
  const std::size_t n = a.dim();
  ComplexVector av(n);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    a.apply(vectors.column(k), av.entries());
    double s = 0.0;
    const auto vk = vectors.column(k);
    for (std::size_t i = 0; i < n; ++i) s += std::norm(av[i] - values[k] * vk[i]);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

void sort_by_values(std::vector<double>& values, ComplexMatrix& vectors) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> sorted(n);
  ComplexMatrix sorted_vectors(n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = values[order[k]];
    std::copy_n(vectors.column(order[k]).begin(), n, sorted_vectors.column(k).begin());
  }
  values = std::move(sorted);
  vectors = std::move(sorted_vectors);
}

// Jacobi without the Hermiticity gate or residual pass. Returns values
// in input order of the diagonal (unsorted).
void jacobi_in_place(ComplexMatrix& a, ComplexMatrix& v) {
  const std::size_t n = a.dim();
  const double scale = a.frobenius_norm();
  const double target = kJacobiRelativeOffNorm * scale;
  if (scale == 0.0) return;
  double off = off_diagonal_norm(a);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off <= target) return;
    // elements far below the target cannot move the off-norm above it
    const double skip = target / static_cast<double>(n);
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > skip * 1e-3) rotate(a, v, p, q);
    off = off_diagonal_norm(a);
  }
  if (off > target) {
    throw ConvergenceError("hermitian_eig: Jacobi did not converge in " +
                               std::to_string(kMaxJacobiSweeps) + " sweeps",
                           off / scale);
  }
}

}  // namespace

EigenSystem hermitian_eig(const ComplexMatrix& a) {
  const std::size_t n = a.dim();
  if (n == 0) throw SizeError("hermitian_eig: empty matrix");
  if (n > kMaxEigenDimension) {
    throw SizeError("hermitian_eig: dimension " + std::to_string(n) + " exceeds cap " +
                    std::to_string(kMaxEigenDimension));
  }
  if (!a.all_finite()) throw DomainError("hermitian_eig: non-finite entry");
  const double defect = a.hermiticity_defect();
  if (defect > kHermitianTolerance) {
    throw DomainError("hermitian_eig: input not Hermitian (defect " + std::to_string(defect) + ")");
  }
  ComplexMatrix work = a;
  // exact Hermitian symmetrization of the working copy
  for (std::size_t c = 0; c < n; ++c) {
    work(c, c) = work(c, c).real();
    for (std::size_t r = 0; r < c; ++r) {
      const Complex avg = 0.5 * (work(r, c) + std::conj(work(c, r)));
      work(r, c) = avg;
      work(c, r) = std::conj(avg);
    }
  }
  EigenSystem out;
  out.vectors = ComplexMatrix::identity(n);
  jacobi_in_place(work, out.vectors);
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = work(k, k).real();
  sort_by_values(out.values, out.vectors);
  out.residual = hermitian_residual(a, out.values, out.vectors);
  return out;
}

EigenSystem unitary_eig(const ComplexMatrix& u) {
  const std::size_t n = u.dim();
  if (n == 0) throw SizeError("unitary_eig: empty matrix");
  if (!u.all_finite()) throw DomainError("unitary_eig: non-finite entry");
  const double defect = unitarity_defect(u);
  if (defect > kUnitaryTolerance) {
    throw DomainError("unitary_eig: input not unitary (defect " + std::to_string(defect) + ")");
  }
  ComplexMatrix re_part(n), im_part(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const Complex x = u(r, c);
      const Complex y = std::conj(u(c, r));
      re_part(r, c) = 0.5 * (x + y);
      im_part(r, c) = (x - y) / Complex(0.0, 2.0);
    }
  }
  EigenSystem cosines = hermitian_eig(re_part);
  ComplexMatrix q = std::move(cosines.vectors);

  // resolve clusters of (U + U^dagger)/2 with the anti-Hermitian part
  std::size_t start = 0;
  ComplexVector tmp(n);
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && cosines.values[end] - cosines.values[end - 1] <= kDegeneracyThreshold) ++end;
    const std::size_t d = end - start;
    if (d > 1) {
      ComplexMatrix sub(d);
      std::vector<ComplexVector> bq(d, ComplexVector(n));
      for (std::size_t j = 0; j < d; ++j) im_part.apply(q.column(start + j), bq[j].entries());
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) sub(i, j) = inner(q.column(start + i), bq[j].entries());
      ComplexMatrix sub_vectors = ComplexMatrix::identity(d);
      jacobi_in_place(sub, sub_vectors);
      ComplexMatrix block(n);  // only first d columns used
      std::vector<ComplexVector> rotated(d, ComplexVector(n));
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) {
          const Complex w = sub_vectors(i, j);
          const auto col = q.column(start + i);
          for (std::size_t k = 0; k < n; ++k) rotated[j][k] += w * col[k];
        }
      for (std::size_t j = 0; j < d; ++j)
        std::copy_n(rotated[j].data(), n, q.column(start + j).begin());
    }
    start = end;
  }

  EigenSystem out;
  out.values.resize(n);
  ComplexVector uq(n);
  std::vector<double> residuals(n);
  for (std::size_t k = 0; k < n; ++k) {
    u.apply(q.column(k), uq.entries());
    const Complex rayleigh = inner(q.column(k), uq.entries());
    double theta = -std::arg(rayleigh);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
    out.values[k] = theta;
    const Complex lambda = std::polar(1.0, -theta);
    double s = 0.0;
    const auto qk = q.column(k);
    for (std::size_t i = 0; i < n; ++i) s += std::norm(uq[i] - lambda * qk[i]);
    residuals[k] = std::sqrt(s);
  }
  out.vectors = std::move(q);
  sort_by_values(out.values, out.vectors);
  out.residual = *std::max_element(residuals.begin(), residuals.end());
  return out;
}

double orthonormality_defect(const ComplexMatrix& vectors) {
  const std::size_t n = vectors.dim();
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      Complex g = inner(vectors.column(i), vectors.column(j));
      if (i == j) g -= 1.0;
      worst = std::max(worst, std::abs(g));
    }
  return worst;
}

}  // namespace loschmidt::numkernel
