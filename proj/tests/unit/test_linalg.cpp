#include <gtest/gtest.h>

#include <cmath>

#include "osmm/linalg.hpp"
#include "osmm/rng.hpp"

namespace osmm {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = rng.normal();
  return M;
}

TEST(LdlSolve, IdentitySystem) {
  const Vector x = ldl_solve(Matrix::Identity(3, 3), Vector::LinSpaced(3, 1, 3));
  EXPECT_NEAR((x - Vector::LinSpaced(3, 1, 3)).norm(), 0.0, 1e-15);
}

TEST(LdlSolve, DiagonalSystem) {
  Matrix K = Matrix::Zero(2, 2);
  K.diagonal() << 2, 4;
  const Vector x = ldl_solve(K, Vector{{2.0, 8.0}});
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_NEAR(x(1), 2.0, 1e-15);
}

TEST(LdlSolve, TwoByTwoByHand) {
  Matrix K(2, 2);
  K << 4, 1, 1, 3;
  const Vector x = ldl_solve(K, Vector{{1.0, 2.0}});
  EXPECT_NEAR(x(0), 1.0 / 11.0, 1e-14);
  EXPECT_NEAR(x(1), 7.0 / 11.0, 1e-14);
}

TEST(LdlSolve, QuasiDefiniteKkt) {
  Rng rng(11);
  const Matrix B = random_matrix(6, 6, rng);
  const Matrix A = random_matrix(2, 6, rng);
  Matrix K = Matrix::Zero(8, 8);
  K.topLeftCorner(6, 6) = B * B.transpose() + Matrix::Identity(6, 6);
  K.topRightCorner(6, 2) = A.transpose();
  K.bottomLeftCorner(2, 6) = A;
  const Vector rhs = random_matrix(8, 1, rng);
  const Vector x = ldl_solve(K, rhs, 1e-12, 6);
  EXPECT_LE((K * x - rhs).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(LdlSolve, SingularPivotThrows) {
  const Matrix K = Matrix::Zero(2, 2);
  try {
    ldl_solve(K, Vector::Ones(2));
    FAIL() << "expected SingularSystem";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
  }
}

TEST(RqUpper, DiagonalInput) {
  Matrix B = Matrix::Zero(2, 2);
  B.diagonal() << 2, 3;
  const RqFactors f = rq_upper(B);
  EXPECT_NEAR((f.R - B).norm(), 0.0, 1e-14);
  EXPECT_NEAR((f.Q - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(RqUpper, OrthogonalInput) {
  Matrix B(2, 2);
  B << 0, -1, 1, 0;
  const RqFactors f = rq_upper(B);
  EXPECT_NEAR((f.R - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
  EXPECT_NEAR((f.Q - B).norm(), 0.0, 1e-14);
}

TEST(RqUpper, ReconstructsSecantShape) {
  Matrix B(2, 2);
  B << 1, 0, -2, 1;
  const RqFactors f = rq_upper(B);
  EXPECT_NEAR((f.R * f.Q - B).norm(), 0.0, 1e-14);
  EXPECT_NEAR(f.R(1, 0), 0.0, 1e-15);
  EXPECT_GE(f.R(0, 0), 0.0);
  EXPECT_GE(f.R(1, 1), 0.0);
}

TEST(RqUpper, RandomMatricesAreUpperAndOrthogonal) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 7;
    const Matrix B = random_matrix(n, n, rng);
    const RqFactors f = rq_upper(B);
    EXPECT_LE((f.R * f.Q - B).norm(), 1e-12 * (1.0 + B.norm()));
    EXPECT_LE((f.Q * f.Q.transpose() - Matrix::Identity(n, n)).norm(), 1e-12);
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_GE(f.R(i, i), 0.0);
      for (Eigen::Index j = 0; j < i; ++j) EXPECT_EQ(f.R(i, j), 0.0);
    }
  }
}

TEST(OrthComplement, AxisAligned) {
  const Matrix Q = orth_complement(Vector::Unit(3, 0));
  ASSERT_EQ(Q.rows(), 3);
  ASSERT_EQ(Q.cols(), 2);
  EXPECT_NEAR(Q.row(0).norm(), 0.0, 1e-15);
  EXPECT_NEAR((Q.transpose() * Q - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(OrthComplement, DiagonalDirection) {
  const Matrix Q = orth_complement(Vector::Ones(2) / std::sqrt(2.0));
  ASSERT_EQ(Q.cols(), 1);
  EXPECT_NEAR(std::abs(Q(0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(Q(0, 0) + Q(1, 0), 0.0, 1e-14);
}

TEST(OrthComplement, RandomDirections) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector w = random_matrix(4, 1, rng);
    const Matrix Q = orth_complement(w);
    EXPECT_LE((Q.transpose() * Q - Matrix::Identity(3, 3)).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE((Q.transpose() * w).lpNorm<Eigen::Infinity>(), 1e-12 * w.norm());
  }
}

TEST(OrthComplement, ZeroVectorThrows) {
  try {
    orth_complement(Vector::Zero(3));
    FAIL() << "expected ZeroVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

}  // namespace
}  // namespace osmm
