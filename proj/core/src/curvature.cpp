#include "osmm/curvature.hpp"

#include <algorithm>
#include <cmath>

namespace osmm {

CurvatureModel::CurvatureModel(Eigen::Index dim, Eigen::Index rank, double eps_abs, double eps_rel)
    : G_(Matrix::Zero(dim, rank)), eps_abs_(eps_abs), eps_rel_(eps_rel) {
  if (dim < 1 || rank < 0) throw Error(ErrorCode::InvalidArgument, "curvature: bad dimensions");
  if (eps_abs <= 0.0 || eps_rel <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "curvature: thresholds must be positive");
  }
}

void CurvatureModel::set_factor(Matrix G, Eigen::Index r1) {
  if (G.rows() != G_.rows() || G.cols() != G_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "curvature: factor shape mismatch");
  }
  if (r1 < 0 || r1 > G.cols()) throw Error(ErrorCode::InvalidArgument, "curvature: bad r1");
  G_ = std::move(G);
  r1_ = r1;
}

double CurvatureModel::tau() const {
  return G_.squaredNorm() / static_cast<double>(G_.rows());
}

Vector CurvatureModel::apply_factor(const Vector& x) const {
  if (x.size() != G_.rows()) throw Error(ErrorCode::DimensionMismatch, "apply_factor");
  return G_.transpose() * x;
}

Vector CurvatureModel::apply(const Vector& x) const { return G_ * apply_factor(x); }

Matrix CurvatureModel::project_block(const Matrix& G2, const Vector& w2) const {
  const Eigen::Index r2 = G2.cols();
  if (r2 <= 1) return Matrix(G2.rows(), 0);
  if (w2.norm() == 0.0) {
    // Every direction is orthogonal to w2 = 0; keep the trailing columns.
    return G2.rightCols(r2 - 1);
  }
  return G2 * orth_complement(w2);
}

CurvatureUpdateKind CurvatureModel::update(const Vector& s, const Vector& y) {
  const Eigen::Index n = G_.rows();
  const Eigen::Index r = G_.cols();
  if (s.size() != n || y.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "curvature update: s/y size mismatch");
  }
  if (r == 0) return CurvatureUpdateKind::None;

  const double sy = s.dot(y);
  const double s_norm = s.norm();
  const double y_norm = y.norm();

  if (sy > std::max(eps_abs_, eps_rel_ * s_norm * y_norm)) {
    // Largest r1 (scanning down from one past the current secant block) with
    // s'y - |G1' s|^2 > eps_rel |s| |y - G1 G1' s|. r1 = 0 always passes here.
    Eigen::Index sel = 0;
    for (Eigen::Index c = std::min(r, r1_ + 1); c > 0; --c) {
      const Vector w1 = G_.leftCols(c).transpose() * s;
      const double lhs = sy - w1.squaredNorm();
      const double rhs = eps_rel_ * s_norm * (y - G_.leftCols(c) * w1).norm();
      if (lhs > rhs) {
        sel = c;
        break;
      }
    }
    last_selected_r1_ = sel;

    const Vector w1 = G_.leftCols(sel).transpose() * s;
    const double inv_root = 1.0 / std::sqrt(sy - w1.squaredNorm());
    Matrix B = Matrix::Identity(sel + 1, sel + 1);
    B(0, 0) = inv_root;
    B.col(0).tail(sel) = -inv_root * w1;
    const Matrix R1 = rq_upper(B).R;

    Matrix Y(n, sel + 1);
    Y.col(0) = y;
    Y.rightCols(sel) = G_.leftCols(sel);
    const Matrix G1_new = Y * R1;

    Matrix G_new = Matrix::Zero(n, r);
    CurvatureUpdateKind kind = CurvatureUpdateKind::Secant;
    if (sel >= r - 1) {
      G_new = G1_new.leftCols(r);
      if (sel == r) kind = CurvatureUpdateKind::SecantTruncated;
    } else {
      const Matrix G2 = G_.middleCols(sel, r - sel);
      const Vector w2 = G2.transpose() * s;
      const Matrix G2_new = project_block(G2, w2);
      G_new.leftCols(sel + 1) = G1_new;
      G_new.rightCols(G2_new.cols()) = G2_new;
    }
    G_ = std::move(G_new);
    r1_ = std::min(sel + 1, r);
    return kind;
  }

  // Curvature condition failed: only the projected block is kept (with the
  // whole factor treated as G2), padded with a zero column.
  const Vector w2 = G_.transpose() * s;
  if (w2.norm() > eps_abs_) {
    Matrix G_new = Matrix::Zero(n, r);
    G_new.leftCols(r - 1) = project_block(G_, w2);
    G_ = std::move(G_new);
    r1_ = 0;
    return CurvatureUpdateKind::ProjectOnly;
  }
  return CurvatureUpdateKind::None;
}

}  // namespace osmm
