#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qst {

using cplx = std::complex<double>;

// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  const std::vector<T>& values() const { return data_; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& m);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

struct TridiagonalSymmetric {
  std::vector<double> diag;     // h_i
  std::vector<double> offdiag;  // J_i / 2

  std::size_t size() const { return diag.size(); }
  // Throws DimensionError / ValidationError.
  void validate() const;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  RealMatrix eigenvectors;          // column k is phi_k, row i is site i (0-based)

  std::size_t size() const { return eigenvalues.size(); }
  double phi(std::size_t site, std::size_t k) const { return eigenvectors(site, k); }
};

// Implicit-shift QL (tql2). Eigenvalues ascending with a stable sort; the first
// nonzero component of every eigenvector is positive.
EigenDecomposition eig_tridiag(const TridiagonalSymmetric& m);

// LU with partial pivoting.
cplx det_complex(const ComplexMatrix& m);

// Determinant of the submatrix on 0-based, strictly increasing index sets.
cplx minor(const ComplexMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace qst
