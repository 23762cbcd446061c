#pragma once

// Independent reference implementations used to check the library. None of
// these call into the code paths they verify.

#include <optional>

#include "osmm/qp.hpp"
#include "osmm/rng.hpp"

namespace osmm::testing {

/// Euclidean projection onto {x >= 0, 1^T x = 1} by the sort-and-threshold
/// rule.
Vector project_simplex_sorted(const Vector& v);

/// Solves a strictly convex QP by enumerating every subset of inequality
/// rows as the active set and keeping the KKT-consistent candidate. Returns
/// nullopt when no subset is consistent (infeasible problem).
std::optional<Vector> qp_active_set_enumeration(const QpProblem& qp);

/// Largest KKT violation of a QP solution: stationarity, primal feasibility,
/// dual feasibility and complementarity (against d - Cx).
double kkt_residual(const QpProblem& qp, const Vector& x, const Vector& y, const Vector& z);

/// Random strictly convex QP with n variables, m inequality rows and
/// me equality rows, feasible by construction (a random interior point
/// satisfies every row with slack).
QpProblem random_feasible_qp(Eigen::Index n, Eigen::Index m, Eigen::Index me, Rng& rng,
                             bool strictly_convex = true);

/// CVaR and EVaR by brute force over a dense alpha grid (the CVaR objective
/// is piecewise linear with kinks at the samples, so those are included).
double cvar_bruteforce(const Vector& losses, double eta);
double evar_bruteforce(const Vector& losses, double eta);

/// Inf-quantile of the sample.
double var_sorted(const Vector& losses, double eta);

/// Minimizes -sum_i pi_i log(r_i^T x) over the simplex by projected
/// gradient descent with backtracking, to a fixed-point residual of 1e-14.
struct KellyReference {
  Vector x;
  double value = 0.0;
};
KellyReference kelly_projected_descent(const Matrix& returns, const Vector& pi);

/// Kelly objective evaluated directly (+inf outside the domain).
double kelly_value(const Matrix& returns, const Vector& pi, const Vector& x);

}  // namespace osmm::testing
