#include <gtest/gtest.h>

#include "osmm/bundle.hpp"

namespace osmm {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

TEST(Bundle, MemoryOneKeepsNewestPiece) {
  Bundle b(1);
  b.push({v1(0), 1.0, v1(1)});
  b.push({v1(2), 5.0, v1(-1)});
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.pieces().front().value, 5.0);
}

TEST(Bundle, FifoEviction) {
  Bundle b(20);
  for (int i = 0; i < 25; ++i) b.push({v1(i), static_cast<double>(i), v1(0)});
  ASSERT_EQ(b.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(b.pieces()[i].value, 5.0 + i);
}

TEST(Bundle, UnderCapacityKeepsAll) {
  Bundle b(3);
  b.push({v1(0), 0.0, v1(0)});
  b.push({v1(1), 1.0, v1(0)});
  EXPECT_EQ(b.size(), 2u);
}

TEST(Bundle, SingleAffinePiece) {
  Bundle b(5);
  b.push({v1(0), 1.0, v1(2)});
  EXPECT_DOUBLE_EQ(b.eval(v1(3)), 7.0);
}

TEST(Bundle, MaxOfTwoPieces) {
  Bundle b(5);
  b.push({v1(0), 0.0, v1(1)});
  b.push({v1(2), 2.0, v1(-1)});
  EXPECT_DOUBLE_EQ(b.eval(v1(1)), 3.0);
}

TEST(Bundle, TightAtNewestAnchor) {
  Bundle b(5);
  b.push({Vector{{1.0, 2.0}}, 0.3, Vector{{1.0, -1.0}}});
  b.push({Vector{{0.5, 0.1}}, 0.7, Vector{{-2.0, 0.5}}});
  b.push({Vector{{-1.0, 0.4}}, 1.9, Vector{{0.2, 0.0}}});
  EXPECT_DOUBLE_EQ(b.eval(Vector{{-1.0, 0.4}}), std::max({1.9, b.piece_value(0, Vector{{-1.0, 0.4}}),
                                                          b.piece_value(1, Vector{{-1.0, 0.4}})}));
}

TEST(Bundle, EpigraphRowsAffine) {
  Bundle b(5);
  b.push({v1(0), 1.0, v1(2)});
  const EpigraphRows rows = b.epigraph_rows();
  ASSERT_EQ(rows.slopes.rows(), 1);
  EXPECT_DOUBLE_EQ(rows.slopes(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(rows.offsets(0), 1.0);
  EXPECT_EQ(rows.rho, 0.0);
}

TEST(Bundle, EpigraphRowsWithQuadratic) {
  Bundle b(5, 2.0);
  b.push({v1(1), 0.0, v1(0)});
  const EpigraphRows rows = b.epigraph_rows();
  EXPECT_DOUBLE_EQ(rows.slopes(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(rows.offsets(0), 1.0);
  EXPECT_DOUBLE_EQ(rows.rho, 2.0);
  // Row plus shared quadratic reproduces the piece.
  const double x = 0.3;
  EXPECT_NEAR(rows.slopes(0, 0) * x + rows.offsets(0) + 0.5 * rows.rho * x * x, b.eval(v1(x)), 1e-15);
}

TEST(Bundle, FloorRowIsLast) {
  Bundle b(5, 0.0, std::nullopt, -5.0);
  b.push({v1(0), 1.0, v1(2)});
  const EpigraphRows rows = b.epigraph_rows();
  ASSERT_EQ(rows.slopes.rows(), 2);
  EXPECT_TRUE(rows.has_floor);
  EXPECT_EQ(rows.piece_rows(), 1);
  EXPECT_DOUBLE_EQ(rows.slopes(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(rows.offsets(1), -5.0);
  EXPECT_DOUBLE_EQ(b.eval(v1(-100)), -5.0);
}

TEST(Bundle, BoxMakesOutsideInfinite) {
  Box box{v1(-1), v1(1)};
  Bundle b(2, 0.0, box);
  b.push({v1(0), 0.0, v1(1)});
  EXPECT_EQ(b.eval(v1(2)), std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(b.eval(v1(0.5)), 0.5);
}

}  // namespace
}  // namespace osmm
