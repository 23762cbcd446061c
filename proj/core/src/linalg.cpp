#include "osmm/linalg.hpp"

#include <cmath>
#include <string>

namespace osmm {

namespace {

constexpr double kPivotFloor = 1e-14;

}  // namespace

LdlFactor::LdlFactor(const Matrix& K, double reg, Eigen::Index positive_block)
    : regularized_(K) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "ldl: matrix is not square");
  }
  if (reg < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "ldl: regularization must be nonnegative");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    regularized_(i, i) += (i < positive_block) ? reg : -reg;
  }

  lower_ = Matrix::Zero(n, n);
  diag_ = Vector::Zero(n);
  Vector scaled(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // scaled_k = L(j,k) * d_k for k < j
    double dj = regularized_(j, j);
    for (Eigen::Index k = 0; k < j; ++k) {
      scaled(k) = lower_(j, k) * diag_(k);
      dj -= lower_(j, k) * scaled(k);
    }
    if (!(std::abs(dj) >= kPivotFloor)) {
      throw Error(ErrorCode::SingularSystem,
                  "ldl: pivot " + std::to_string(dj) + " at index " + std::to_string(j));
    }
    diag_(j) = dj;
    const auto sj = scaled.head(j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double dot = lower_.row(i).head(j).dot(sj);
      lower_(i, j) = (regularized_(i, j) - dot) / dj;
    }
  }
}

Vector LdlFactor::substitute(const Vector& rhs) const {
  const Eigen::Index n = diag_.size();
  Vector u = rhs;
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i) -= lower_.row(i).head(i).dot(u.head(i));
  }
  u.array() /= diag_.array();
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index k = i + 1; k < n; ++k) u(i) -= lower_(k, i) * u(k);
  }
  return u;
}

Vector LdlFactor::solve(const Vector& rhs) const {
  if (rhs.size() != diag_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ldl: rhs size mismatch");
  }
  Vector u = substitute(rhs);
  const Vector residual = rhs - regularized_ * u;
  u += substitute(residual);
  return u;
}

Vector ldl_solve(const Matrix& K, const Vector& rhs, double reg, Eigen::Index positive_block) {
  return LdlFactor(K, reg, positive_block).solve(rhs);
}

RqFactors rq_upper(const Matrix& B) {
  const Eigen::Index n = B.rows();
  if (B.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "rq_upper: matrix is not square");
  }
  if (n == 0) return {Matrix(0, 0), Matrix(0, 0)};

  // With J the exchange matrix: (J B)^T = Qt Rt  =>  B = (J Rt^T J) (J Qt^T).
  Matrix flipped_t = B.colwise().reverse().transpose();
  Eigen::HouseholderQR<Matrix> qr(flipped_t);
  Matrix Qt = qr.householderQ();
  Matrix Rt = qr.matrixQR().triangularView<Eigen::Upper>();

  RqFactors out;
  out.R = Rt.transpose().reverse();  // J Rt^T J
  out.Q = Qt.transpose().colwise().reverse();  // J Qt^T
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.R(i, i) < 0.0) {
      out.R.col(i) *= -1.0;
      out.Q.row(i) *= -1.0;
    }
  }
  return out;
}

Matrix orth_complement(const Vector& w) {
  const Eigen::Index r = w.size();
  if (r < 1) {
    throw Error(ErrorCode::DimensionMismatch, "orth_complement: empty vector");
  }
  const double norm = w.norm();
  if (norm == 0.0) {
    throw Error(ErrorCode::ZeroVector, "orth_complement: w is zero");
  }
  // Reflector H = I - 2 v v^T / (v^T v) with v = w + sign(w0) |w| e1.
  Vector v = w;
  v(0) += (w(0) >= 0.0 ? norm : -norm);
  const double vv = v.squaredNorm();
  Matrix H = Matrix::Identity(r, r) - (2.0 / vv) * v * v.transpose();
  return H.rightCols(r - 1);
}

}  // namespace osmm
