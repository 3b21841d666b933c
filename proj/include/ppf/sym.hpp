#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ppf {

// Symmetric matrices are stored as flat vectors over the upper triangle in
// column-major order (11, 12, 22, 13, 23, 33, ...), with off-diagonal
// entries scaled by sqrt(2) so that the Euclidean inner product of two
// packed vectors equals trace(A*B).

inline int packed_size(int p) { return p * (p + 1) / 2; }

// Matrix dimension p from a packed length d, or -1 if d is not triangular.
inline int matrix_dim_of_packed(int d) {
  int p = static_cast<int>(std::round((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0));
  return packed_size(p) == d ? p : -1;
}

// Index of entry (i,j), i <= j, in the packed layout.
inline int packed_index(int i, int j) { return j * (j + 1) / 2 + i; }

// Index of diagonal entry (i,i).
inline int packed_diag_index(int i) { return i * (i + 3) / 2; }

inline Eigen::VectorXd pack_sym(const Eigen::MatrixXd& A, double sym_tol = 1e-12) {
  const int p = static_cast<int>(A.rows());
  if (A.cols() != p) throw std::invalid_argument("pack_sym: matrix is not square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw std::invalid_argument("pack_sym: matrix is not symmetric");
  static const double kSqrt2 = std::sqrt(2.0);
  Eigen::VectorXd v(packed_size(p));
  for (int j = 0, k = 0; j < p; ++j)
    for (int i = 0; i <= j; ++i, ++k) v[k] = (i == j) ? A(i, j) : kSqrt2 * A(i, j);
  return v;
}

inline Eigen::MatrixXd unpack_sym(const Eigen::VectorXd& v, int p) {
  if (static_cast<int>(v.size()) != packed_size(p))
    throw std::invalid_argument("unpack_sym: length does not match dimension");
  static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd A(p, p);
  for (int j = 0, k = 0; j < p; ++j)
    for (int i = 0; i <= j; ++i, ++k) {
      const double a = (i == j) ? v[k] : kInvSqrt2 * v[k];
      A(i, j) = a;
      A(j, i) = a;
    }
  return A;
}

}  // namespace ppf
