#pragma once

#include "osmm/linalg.hpp"

namespace osmm {

/// Which branch of the low-rank update fired on the last call.
enum class CurvatureUpdateKind {
  None,            // model unchanged
  Secant,          // curvature condition held; G1 and G2 updated
  SecantTruncated, // curvature condition held with r1 >= r - 1; G2 dropped
  ProjectOnly,     // curvature condition failed; only G2 updated, zero padded
};

/// Low-rank quasi-Newton curvature model H = G G^T (G is n x r), updated with
/// Fletcher's two-block scheme. The first r1 columns of G form the block that
/// absorbs new secant pairs; the remaining r - r1 columns are re-projected to
/// be orthogonal to the step.
class CurvatureModel {
 public:
  CurvatureModel(Eigen::Index dim, Eigen::Index rank, double eps_abs = 1e-8, double eps_rel = 1e-3);

  /// Applies one update with s = x_{k+1} - x_k and y = grad f(x_{k+1}) - grad f(x_k).
  CurvatureUpdateKind update(const Vector& s, const Vector& y);

  /// Tr(H) / n = |G|_F^2 / n.
  double tau() const;

  /// G^T x.
  Vector apply_factor(const Vector& x) const;

  /// H x computed as G (G^T x).
  Vector apply(const Vector& x) const;

  const Matrix& factor() const { return G_; }
  Eigen::Index dim() const { return G_.rows(); }
  Eigen::Index rank() const { return G_.cols(); }

  /// Size of the secant block carried into the next update.
  Eigen::Index r1() const { return r1_; }

  /// r1 selected during the last Secant/SecantTruncated update.
  Eigen::Index last_selected_r1() const { return last_selected_r1_; }

  double eps_abs() const { return eps_abs_; }
  double eps_rel() const { return eps_rel_; }

  /// Replaces the factor; used by tests and by callers seeding a model.
  void set_factor(Matrix G, Eigen::Index r1);

 private:
  Matrix project_block(const Matrix& G2, const Vector& w2) const;

  Matrix G_;
  Eigen::Index r1_ = 0;
  Eigen::Index last_selected_r1_ = 0;
  double eps_abs_;
  double eps_rel_;
};

}  // namespace osmm
