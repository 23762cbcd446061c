#include <gtest/gtest.h>

#include "osmm/qp.hpp"
#include "osmm/rng.hpp"
#include "reference.hpp"

namespace osmm {
namespace {

TEST(SolveQp, LowerBoundedScalar) {
  QpProblem qp = QpProblem::zeros(1);
  qp.quad_diag = Vector::Ones(1);
  qp.ineq_matrix = Matrix::Constant(1, 1, -1.0);
  qp.ineq_rhs = Vector::Constant(1, -1.0);
  const QpSolution sol = solve_qp(qp);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-8);
  EXPECT_NEAR(sol.ineq_duals(0), 1.0, 1e-8);
}

TEST(SolveQp, SimplexProjection) {
  QpProblem qp = QpProblem::zeros(2);
  qp.quad_diag = Vector::Ones(2);
  qp.linear = Vector{{-2.0, 0.0}};
  qp.eq_matrix = Matrix::Ones(1, 2);
  qp.eq_rhs = Vector::Ones(1);
  qp.ineq_matrix = -Matrix::Identity(2, 2);
  qp.ineq_rhs = Vector::Zero(2);
  const QpSolution sol = solve_qp(qp);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-8);
  EXPECT_NEAR(sol.x(1), 0.0, 1e-8);
  EXPECT_LE(testing::kkt_residual(qp, sol.x, sol.eq_duals, sol.ineq_duals), 1e-8);
}

TEST(SolveQp, UnboundedLinear) {
  QpProblem qp = QpProblem::zeros(1);
  qp.linear = Vector::Constant(1, -1.0);
  EXPECT_EQ(solve_qp(qp).status, QpStatus::Unbounded);
}

TEST(SolveQp, Infeasible) {
  QpProblem qp = QpProblem::zeros(1);
  qp.quad_diag = Vector::Ones(1);
  qp.ineq_matrix = Matrix(2, 1);
  qp.ineq_matrix << 1.0, -1.0;
  qp.ineq_rhs = Vector{{-1.0, -1.0}};  // x <= -1 and x >= 1
  EXPECT_EQ(solve_qp(qp).status, QpStatus::Infeasible);
}

TEST(SolveQp, LinearProgramOverSimplex) {
  QpProblem qp = QpProblem::zeros(3);
  qp.linear = Vector{{0.3, -0.2, 0.5}};
  qp.eq_matrix = Matrix::Ones(1, 3);
  qp.eq_rhs = Vector::Ones(1);
  qp.ineq_matrix = -Matrix::Identity(3, 3);
  qp.ineq_rhs = Vector::Zero(3);
  const QpSolution sol = solve_qp(qp);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.objective, -0.2, 1e-8);
}

TEST(SolveQp, MatchesActiveSetEnumeration) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 3;
    const Eigen::Index m = 1 + trial % 6;
    const QpProblem qp = testing::random_feasible_qp(n, m, trial % 2 == 0 ? 0 : 1, rng);
    const auto reference = testing::qp_active_set_enumeration(qp);
    ASSERT_TRUE(reference.has_value());
    const QpSolution sol = solve_qp(qp);
    ASSERT_EQ(sol.status, QpStatus::Optimal);
    EXPECT_LE((sol.x - *reference).lpNorm<Eigen::Infinity>(), 1e-7);
  }
}

TEST(SolveQp, DimensionMismatchThrows) {
  QpProblem qp = QpProblem::zeros(2);
  qp.ineq_matrix = Matrix::Ones(1, 3);
  qp.ineq_rhs = Vector::Ones(1);
  try {
    solve_qp(qp);
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

}  // namespace
}  // namespace osmm
