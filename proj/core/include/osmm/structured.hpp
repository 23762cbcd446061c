#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "osmm/bundle.hpp"
#include "osmm/linalg.hpp"
#include "osmm/qp.hpp"
#include "osmm/rng.hpp"

namespace osmm {

using IndexList = std::vector<Eigen::Index>;

/// 1^T x_S = 1, x_S >= 0.
struct SimplexAtom {
  IndexList coords;
};

/// A x = b.
struct EqualityAtom {
  Matrix A;
  Vector b;
};

/// C x <= d.
struct InequalityAtom {
  Matrix C;
  Vector d;
};

/// |x_S|_1 <= radius.
struct L1BallAtom {
  IndexList coords;
  double radius = 1.0;
};

/// Piecewise-affine budget
///   sum_j linear_j x_{S_j} + sum_j hinge_j (x_{S_j} - kink_j)_+ <= budget,
/// hinge_j >= 0. Lowered with one epigraph variable per coordinate.
struct HingeBudgetAtom {
  IndexList coords;
  Vector linear;
  Vector hinge;
  Vector kink;
  double budget = 0.0;

  double cost(const Vector& x) const;
};

/// g(x) = c^T x + (1/2)|F^T x|^2 + indicator of the constraint atoms.
struct StructuredFunction {
  Eigen::Index dim = 0;
  std::optional<Vector> linear_cost;
  std::optional<Matrix> quad_factor;  // n x p
  std::optional<Box> box;             // entries may be +-inf
  IndexList nonneg;
  std::optional<SimplexAtom> simplex;
  std::optional<EqualityAtom> equalities;
  std::optional<InequalityAtom> inequalities;
  std::optional<L1BallAtom> l1_ball;
  std::optional<HingeBudgetAtom> hinge_budget;

  explicit StructuredFunction(Eigen::Index n = 0) : dim(n) {}

  /// Cost atoms only (no feasibility check).
  double cost(const Vector& x) const;

  /// Gradient of the cost atoms.
  Vector cost_gradient(const Vector& x) const;

  /// Largest scaled constraint violation (0 when feasible).
  double violation(const Vector& x) const;

  bool has_constraints() const;

  /// Throws DimensionMismatch / InvalidArgument on malformed atoms.
  void validate() const;
};

/// Evaluates g; +inf when the scaled violation exceeds feas_tol.
double eval_g(const StructuredFunction& g, const Vector& x, double feas_tol = 1e-8);

/// Standard-form lowering of g. Lifted variables are laid out as
/// [x (n) | l1 split or abs-epigraph | hinge epigraph].
struct CanonicalQPPieces {
  Eigen::Index dim = 0;         // original n
  Eigen::Index lifted_dim = 0;  // n + auxiliary count
  Eigen::Index l1_offset = 0;
  Eigen::Index l1_count = 0;    // lifted columns used by the l1 atom
  Eigen::Index hinge_offset = 0;
  Eigen::Index hinge_count = 0;
  bool l1_split = true;

  Vector linear;       // lifted
  Matrix quad_factor;  // lifted x p
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;

  /// Original coordinates of a lifted point.
  Vector restrict(const Vector& lifted) const { return lifted.head(dim); }

  /// Lifted point whose auxiliary variables are the tightest consistent
  /// values for x (split parts / absolute values / hinge values).
  Vector lift(const Vector& x, const StructuredFunction& g) const;
};

/// Lowers g into one equality and one inequality block. The l1 atom uses
/// x_S = u - v, u, v >= 0, 1^T(u + v) <= L when include_l1_split is set, and
/// t >= |x_S|, 1^T t <= L otherwise.
CanonicalQPPieces canonicalize(const StructuredFunction& g, bool include_l1_split = true);

/// Minimizes (1/2)|x - target|^2 over dom g (cost atoms ignored). Throws
/// SubproblemFailed when the QP is not solved to optimality.
Vector project_onto_domain(const StructuredFunction& g, const Vector& target);

/// Draws feasible points of g as convex combinations of precomputed anchor
/// points (projections of random targets) and a caller-supplied base point.
class FeasiblePointSampler {
 public:
  FeasiblePointSampler(const StructuredFunction& g, const Vector& center, int anchors = 16,
                       std::uint64_t seed = 0x5eed);

  const std::vector<Vector>& anchors() const { return anchors_; }

  /// Random feasible point: a random convex combination of the anchors and
  /// `base`, pulled toward `base` by a log-uniform factor in [1e-4, 1].
  Vector sample(const Vector& base, Rng& rng) const;

 private:
  std::vector<Vector> anchors_;
};

/// max over `probes` random feasible u of g(x) + q^T (u - x) - g(u). A valid
/// subgradient yields a value <= 0 up to rounding. Throws InfeasibleBase
/// when g(x) = +inf.
double subgradient_valid(const StructuredFunction& g, const Vector& x, const Vector& q, int probes,
                         const FeasiblePointSampler* sampler = nullptr, std::uint64_t seed = 7);

}  // namespace osmm
