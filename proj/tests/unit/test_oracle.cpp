#include <gtest/gtest.h>

#include <cmath>

#include "osmm/oracle.hpp"
#include "osmm/problems.hpp"

namespace osmm {
namespace {

Oracle half_square(Eigen::Index n) {
  return Oracle(n, [](const Vector& x, bool need_gradient) {
    OracleEval ev;
    ev.value = 0.5 * x.squaredNorm();
    if (need_gradient) ev.gradient = x;
    return ev;
  });
}

TEST(Oracle, QuadraticValueAndGradient) {
  Oracle o = half_square(2);
  const OracleEval ev = o.evaluate(Vector{{3.0, 4.0}});
  EXPECT_DOUBLE_EQ(ev.value, 12.5);
  ASSERT_TRUE(ev.gradient.has_value());
  EXPECT_DOUBLE_EQ((*ev.gradient)(0), 3.0);
  EXPECT_DOUBLE_EQ((*ev.gradient)(1), 4.0);
}

TEST(Oracle, CountsValueAndGradientCallsSeparately) {
  Oracle o = half_square(2);
  o.evaluate(Vector::Ones(2));
  o.value(Vector::Ones(2));
  o.value(Vector::Ones(2));
  EXPECT_EQ(o.gradient_calls(), 1);
  EXPECT_EQ(o.value_calls(), 2);
}

TEST(Oracle, NanIsRejected) {
  Oracle o(1, [](const Vector&, bool) {
    OracleEval ev;
    ev.value = std::nan("");
    return ev;
  });
  try {
    o.value(Vector::Zero(1));
    FAIL() << "expected NonFiniteOracle";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteOracle);
  }
}

TEST(Oracle, KellyOutsideDomainIsInfinite) {
  const ProblemInstance inst = gen_kelly(4, 50, 1);
  Oracle o = inst.make_oracle();
  Vector x = Vector::Zero(4);
  x(0) = -1.0;  // every return is positive, so r^T x < 0
  const OracleEval ev = o.evaluate(x);
  EXPECT_FALSE(ev.finite());
  EXPECT_FALSE(ev.gradient.has_value());
}

TEST(Oracle, EvarOutsideDomainIsInfinite) {
  const ProblemInstance inst = gen_newsvendor(3, 100, 2);
  Oracle o = inst.make_oracle();
  Vector x = inst.x0;
  x(x.size() - 1) = 0.0;
  EXPECT_EQ(o.value(x), kInf);
  x(x.size() - 1) = -1.0;
  EXPECT_EQ(o.value(x), kInf);
}

TEST(GradientCheck, ExactForQuadratics) {
  Oracle o = half_square(5);
  EXPECT_LE(gradient_check(o, Vector::LinSpaced(5, -2, 2)).max_rel_error, 1e-9);
}

TEST(GradientCheck, KellyAtUniformWeights) {
  const ProblemInstance inst = gen_kelly(10, 2000, 0);
  Oracle o = inst.make_oracle();
  EXPECT_LE(gradient_check(o, inst.x0).max_rel_error, 1e-5);
}

TEST(GradientCheck, ReportsKinkInsteadOfThrowing) {
  const ProblemInstance inst = gen_cvar_portfolio(3, 200, 4);
  Oracle o = inst.make_oracle();
  // Put alpha exactly on one sample loss so the hinge kink lies inside the stencil.
  Vector x = inst.x0;
  const Matrix& R = inst.arrays.at("returns");
  const Eigen::Index n = x.size() - 1;
  x(n) = -R.row(0).dot(x.head(n));
  GradientCheck r;
  EXPECT_NO_THROW(r = gradient_check(o, x));
  EXPECT_GT(r.max_rel_error, 1e-5);
  EXPECT_GE(r.worst_coordinate, 0);
}

TEST(GradientCheck, StencilLeavingDomainThrows) {
  Oracle o(1, [](const Vector& x, bool need_gradient) {
    OracleEval ev;
    if (x(0) <= 0.0) return ev;
    ev.value = -std::log(x(0));
    if (need_gradient) ev.gradient = Vector::Constant(1, -1.0 / x(0));
    return ev;
  });
  try {
    gradient_check(o, Vector::Constant(1, 1e-8));
    FAIL() << "expected StencilLeftDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StencilLeftDomain);
  }
}

}  // namespace
}  // namespace osmm
