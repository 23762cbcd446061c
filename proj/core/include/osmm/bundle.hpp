#pragma once

#include <deque>
#include <optional>

#include "osmm/linalg.hpp"

namespace osmm {

/// Per-coordinate bounds; entries may be +-inf.
struct Box {
  Vector lower;
  Vector upper;

  bool contains(const Vector& x, double tol = 0.0) const;
};

/// Tangent plane of f at an anchor point.
struct BundlePiece {
  Vector anchor;
  double value = 0.0;
  Vector gradient;
};

/// Affine rows z >= a_i^T x + b_i describing the minorant, with the shared
/// quadratic (rho/2)|x|^2 kept separate. When a floor is set, the last row is
/// (0, floor).
struct EpigraphRows {
  Matrix slopes;
  Vector offsets;
  double rho = 0.0;
  bool has_floor = false;
  std::optional<Box> box;

  Eigen::Index piece_rows() const { return slopes.rows() - (has_floor ? 1 : 0); }
};

/// Limited-memory piecewise-affine (or piecewise-quadratic when rho > 0)
/// minorant of f built from the most recent `memory` tangent planes.
/// Eviction is FIFO; the newest piece belongs to the current iterate.
class Bundle {
 public:
  explicit Bundle(Eigen::Index memory, double rho = 0.0, std::optional<Box> box = std::nullopt,
                  std::optional<double> floor = std::nullopt);

  void push(BundlePiece piece);

  /// max_i [f_i + g_i^T (x - x_i) + (rho/2)|x - x_i|^2], then max with the
  /// floor; +inf outside the box.
  double eval(const Vector& x) const;

  EpigraphRows epigraph_rows() const;

  /// Value of a single piece at x (without floor or box).
  double piece_value(std::size_t i, const Vector& x) const;

  /// Gradient of a single piece at x.
  Vector piece_gradient(std::size_t i, const Vector& x) const;

  const std::deque<BundlePiece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }
  Eigen::Index memory() const { return memory_; }
  double rho() const { return rho_; }
  const std::optional<Box>& box() const { return box_; }
  const std::optional<double>& floor() const { return floor_; }

 private:
  Eigen::Index memory_;
  double rho_;
  std::optional<Box> box_;
  std::optional<double> floor_;
  std::deque<BundlePiece> pieces_;
};

}  // namespace osmm
