#include "qst/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qst/errors.h"

namespace qst {

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

void TridiagonalSymmetric::validate() const {
  if (diag.empty()) throw DimensionError("tridiagonal matrix must have N >= 1");
  if (offdiag.size() + 1 != diag.size())
    throw DimensionError("tridiagonal matrix: |offdiag| must equal |diag| - 1");
  for (double x : diag)
    if (!std::isfinite(x)) throw ValidationError("tridiagonal matrix: non-finite diagonal entry");
  for (double x : offdiag)
    if (!std::isfinite(x)) throw ValidationError("tridiagonal matrix: non-finite off-diagonal entry");
}

namespace {

constexpr int kMaxQlIterations = 30;

// EISPACK tql2. d holds the diagonal, e[i] couples i and i+1 with e[n-1] = 0.
// V accumulates the rotations (starts as identity).
void tql2(std::vector<double>& d, std::vector<double>& e, RealMatrix& V) {
  const std::size_t n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  double f = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterations)
          throw SolverError("eig_tridiag: QL iteration did not converge for eigenvalue " +
                                std::to_string(l),
                            static_cast<int>(l));
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = V(k, ii + 1);
            V(k, ii + 1) = s * V(k, ii) + c * h;
            V(k, ii) = c * V(k, ii) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

EigenDecomposition eig_tridiag(const TridiagonalSymmetric& m) {
  m.validate();
  const std::size_t n = m.size();
  std::vector<double> d = m.diag;
  std::vector<double> e(n, 0.0);
  std::copy(m.offdiag.begin(), m.offdiag.end(), e.begin());
  RealMatrix V = RealMatrix::identity(n);
  tql2(d, e, V);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = RealMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = d[src];
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (V(i, src) != 0.0) {
        sign = V(i, src) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = sign * V(i, src);
  }
  return out;
}

cplx det_complex(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("det_complex: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0) throw DimensionError("det_complex: empty matrix");
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);

  ComplexMatrix lu = m;
  cplx det{1.0, 0.0};
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(lu(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(lu(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return cplx{};
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(col, c), lu(piv, c));
      det = -det;
    }
    const cplx pivot = lu(col, col);
    det *= pivot;
    for (std::size_t r = col + 1; r < n; ++r) {
      const cplx factor = lu(r, col) / pivot;
      if (factor == cplx{}) continue;
      for (std::size_t c = col + 1; c < n; ++c) lu(r, c) -= factor * lu(col, c);
    }
  }
  return det;
}

namespace {

void check_index_set(const std::vector<int>& idx, std::size_t bound, const char* what) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || static_cast<std::size_t>(idx[k]) >= bound)
      throw DimensionError(std::string("minor: ") + what + " index out of range");
    if (k > 0 && idx[k] <= idx[k - 1])
      throw ValidationError(std::string("minor: ") + what + " indices must be strictly increasing");
  }
}

}  // namespace

cplx minor(const ComplexMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.size() != cols.size()) throw DimensionError("minor: row and column sets differ in size");
  if (rows.empty()) throw DimensionError("minor: empty index set");
  check_index_set(rows, m.rows(), "row");
  check_index_set(cols, m.cols(), "column");
  const std::size_t k = rows.size();
  if (k == 1) return m(rows[0], cols[0]);
  ComplexMatrix sub(k, k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) sub(a, b) = m(rows[a], cols[b]);
  return det_complex(sub);
}

}  // namespace qst
