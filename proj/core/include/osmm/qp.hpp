#pragma once

#include <string_view>

#include "osmm/linalg.hpp"

namespace osmm {

/// minimize   (1/2) x^T (F F^T + diag(d)) x + c^T x
/// subject to A x = b,  C x <= d
///
/// The quadratic is given by a factor F (n x p, p may be 0) plus an optional
/// nonnegative diagonal, so P is PSD by construction.
struct QpProblem {
  Matrix quad_factor;
  Vector quad_diag;  // empty or size n
  Vector linear;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;

  Eigen::Index dim() const { return linear.size(); }

  /// Builds an unconstrained problem of dimension n with zero data.
  static QpProblem zeros(Eigen::Index n);

  /// Dense P = F F^T + diag(d).
  Matrix hessian() const;

  double objective(const Vector& x) const;

  /// Throws DimensionMismatch on inconsistent blocks.
  void validate() const;
};

enum class QpStatus { Optimal, Unbounded, Infeasible, MaxIters };

std::string_view to_string(QpStatus status);

struct QpSolution {
  QpStatus status = QpStatus::MaxIters;
  Vector x;
  Vector eq_duals;    // y
  Vector ineq_duals;  // z >= 0
  Vector slacks;      // d - C x at the final iterate (interior-point slacks)
  double primal_residual = 0.0;  // scaled
  double dual_residual = 0.0;    // scaled
  double complementarity = 0.0;  // s^T z / (1 + |objective|)
  double objective = 0.0;
  int iterations = 0;
};

struct QpSettings {
  double tol = 1e-9;
  int max_iters = 100;
  double regularization = 1e-9;
  double step_fraction = 0.99;
  double unbounded_objective = -1e12;
};

/// Dense primal-dual interior-point solver (Mehrotra predictor-corrector).
/// Each Newton step solves the quasi-definite reduced KKT system
///   [P + C' W C   A'] [dx]   [r1]
///   [A          -dI] [dy] = [r2],   W = diag(z ./ s)
/// with a regularized LDL^T, refined against the unreduced Newton equations.
/// When the refined residual stays large (w spanning many orders of
/// magnitude near degenerate solutions) the step is recomputed from the
/// unreduced system with partial-pivot LU. Throws NumericalBreakdown if the
/// factorization fails even at the largest regularization tried.
QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings = {});

inline QpSolution solve_qp(const QpProblem& qp, double tol, int max_iters) {
  QpSettings s;
  s.tol = tol;
  s.max_iters = max_iters;
  return solve_qp(qp, s);
}

}  // namespace osmm
