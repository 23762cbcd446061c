#pragma once

#include <Eigen/Dense>

#include "osmm/error.hpp"

namespace osmm {

/// Dense row-major matrix used throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Solves the symmetric system (K + D) u = rhs with a pivot-free LDL^T
/// factorization, where D is a static diagonal regularization: +reg on the
/// first `positive_block` indices and -reg on the remainder. This is the
/// quasi-definite pattern of interior-point KKT matrices. One step of
/// iterative refinement is applied against (K + D).
///
/// Throws Error(SingularSystem) when a pivot magnitude drops below 1e-14.
Vector ldl_solve(const Matrix& K, const Vector& rhs, double reg, Eigen::Index positive_block);

/// Convenience overload: +reg on every diagonal entry.
inline Vector ldl_solve(const Matrix& K, const Vector& rhs, double reg = 0.0) {
  return ldl_solve(K, rhs, reg, K.rows());
}

/// Factorization reused across several right-hand sides.
class LdlFactor {
 public:
  LdlFactor(const Matrix& K, double reg, Eigen::Index positive_block);

  /// Solve with one refinement pass against the regularized matrix.
  Vector solve(const Vector& rhs) const;

  Eigen::Index size() const { return regularized_.rows(); }

 private:
  Vector substitute(const Vector& rhs) const;

  Matrix regularized_;
  Matrix lower_;  // unit lower triangle, strictly below the diagonal
  Vector diag_;
};

struct RqFactors {
  Matrix R;  // upper triangular, nonnegative diagonal
  Matrix Q;  // orthogonal
};

/// B = R * Q with R upper triangular. Computed from the QR factorization of
/// the row-flipped transpose; signs are normalized so diag(R) >= 0.
RqFactors rq_upper(const Matrix& B);

/// Orthonormal basis (r x (r-1)) of the complement of w in R^r. Built from a
/// Householder reflector sending w to a multiple of e1; columns 2..r of the
/// reflector are returned. Throws Error(ZeroVector) if w == 0.
Matrix orth_complement(const Vector& w);

}  // namespace osmm
