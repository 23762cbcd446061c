#include "osmm/structured.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "osmm/oracle.hpp"
#include "osmm/rng.hpp"

namespace osmm {

namespace {

double scaled(double violation, double rhs) { return violation / std::max(1.0, std::abs(rhs)); }

void check_coords(const IndexList& coords, Eigen::Index n, const char* what) {
  for (Eigen::Index j : coords) {
    if (j < 0 || j >= n) throw Error(ErrorCode::DimensionMismatch, what);
  }
}

/// Row-wise builder for the constraint blocks of the lowered problem.
class RowBlock {
 public:
  explicit RowBlock(Eigen::Index cols) : cols_(cols) {}

  Eigen::Index add_row(double rhs) {
    rows_.emplace_back(Vector::Zero(cols_));
    rhs_.push_back(rhs);
    return static_cast<Eigen::Index>(rows_.size()) - 1;
  }

  double& at(Eigen::Index row, Eigen::Index col) { return rows_[static_cast<std::size_t>(row)](col); }

  void append(const Matrix& M, const Vector& rhs) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const Eigen::Index r = add_row(rhs(i));
      rows_.back().head(M.cols()) = M.row(i).transpose();
      (void)r;
    }
  }

  void finish(Matrix& M, Vector& rhs) const {
    M.resize(static_cast<Eigen::Index>(rows_.size()), cols_);
    rhs.resize(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      M.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
      rhs(static_cast<Eigen::Index>(i)) = rhs_[i];
    }
  }

 private:
  Eigen::Index cols_;
  std::vector<Vector> rows_;
  std::vector<double> rhs_;
};

}  // namespace

double HingeBudgetAtom::cost(const Vector& x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    const double xj = x(coords[k]);
    v += linear(j) * xj + hinge(j) * std::max(xj - kink(j), 0.0);
  }
  return v;
}

double StructuredFunction::cost(const Vector& x) const {
  double v = 0.0;
  if (linear_cost) v += linear_cost->dot(x);
  if (quad_factor && quad_factor->cols() > 0) v += 0.5 * (quad_factor->transpose() * x).squaredNorm();
  return v;
}

Vector StructuredFunction::cost_gradient(const Vector& x) const {
  Vector grad = Vector::Zero(dim);
  if (linear_cost) grad += *linear_cost;
  if (quad_factor && quad_factor->cols() > 0) {
    grad.noalias() += *quad_factor * (quad_factor->transpose() * x);
  }
  return grad;
}

double StructuredFunction::violation(const Vector& x) const {
  double worst = 0.0;
  auto note = [&worst](double v) { worst = std::max(worst, v); };
  if (box) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (std::isfinite(box->lower(j))) note(scaled(box->lower(j) - x(j), box->lower(j)));
      if (std::isfinite(box->upper(j))) note(scaled(x(j) - box->upper(j), box->upper(j)));
    }
  }
  for (Eigen::Index j : nonneg) note(-x(j));
  if (simplex) {
    double sum = 0.0;
    for (Eigen::Index j : simplex->coords) {
      note(-x(j));
      sum += x(j);
    }
    note(std::abs(sum - 1.0));
  }
  if (equalities) {
    const Vector r = equalities->A * x - equalities->b;
    for (Eigen::Index i = 0; i < r.size(); ++i) note(scaled(std::abs(r(i)), equalities->b(i)));
  }
  if (inequalities) {
    const Vector r = inequalities->C * x - inequalities->d;
    for (Eigen::Index i = 0; i < r.size(); ++i) note(scaled(r(i), inequalities->d(i)));
  }
  if (l1_ball) {
    double norm = 0.0;
    for (Eigen::Index j : l1_ball->coords) norm += std::abs(x(j));
    note(scaled(norm - l1_ball->radius, l1_ball->radius));
  }
  if (hinge_budget) {
    note(scaled(hinge_budget->cost(x) - hinge_budget->budget, hinge_budget->budget));
  }
  return worst;
}

bool StructuredFunction::has_constraints() const {
  return box.has_value() || !nonneg.empty() || simplex.has_value() || equalities.has_value() ||
         inequalities.has_value() || l1_ball.has_value() || hinge_budget.has_value();
}

void StructuredFunction::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::DimensionMismatch, what); };
  if (dim <= 0) throw Error(ErrorCode::InvalidArgument, "g: dimension must be positive");
  if (linear_cost && linear_cost->size() != dim) fail("g: linear cost size != n");
  if (quad_factor && quad_factor->rows() != dim) fail("g: quadratic factor rows != n");
  if (box) {
    if (box->lower.size() != dim || box->upper.size() != dim) fail("g: box size != n");
    if ((box->lower.array() > box->upper.array()).any()) {
      throw Error(ErrorCode::InvalidArgument, "g: box lower bound exceeds upper bound");
    }
  }
  check_coords(nonneg, dim, "g: nonnegativity index out of range");
  if (simplex) check_coords(simplex->coords, dim, "g: simplex index out of range");
  if (equalities && (equalities->A.cols() != dim || equalities->A.rows() != equalities->b.size())) {
    fail("g: equality block shape");
  }
  if (inequalities &&
      (inequalities->C.cols() != dim || inequalities->C.rows() != inequalities->d.size())) {
    fail("g: inequality block shape");
  }
  if (l1_ball) {
    check_coords(l1_ball->coords, dim, "g: l1-ball index out of range");
    if (!(l1_ball->radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "g: l1 radius < 0");
  }
  if (hinge_budget) {
    const auto k = static_cast<Eigen::Index>(hinge_budget->coords.size());
    check_coords(hinge_budget->coords, dim, "g: hinge-budget index out of range");
    if (hinge_budget->linear.size() != k || hinge_budget->hinge.size() != k ||
        hinge_budget->kink.size() != k) {
      fail("g: hinge-budget coefficient sizes");
    }
    if ((hinge_budget->hinge.array() < 0.0).any()) {
      throw Error(ErrorCode::InvalidArgument, "g: hinge coefficients must be nonnegative");
    }
  }
}

double eval_g(const StructuredFunction& g, const Vector& x, double feas_tol) {
  if (x.size() != g.dim) throw Error(ErrorCode::DimensionMismatch, "eval_g: dim(x) != n");
  if (!x.allFinite()) return kInf;
  if (g.violation(x) > feas_tol) return kInf;
  return g.cost(x);
}

Vector CanonicalQPPieces::lift(const Vector& x, const StructuredFunction& g) const {
  Vector out = Vector::Zero(lifted_dim);
  out.head(dim) = x;
  if (g.l1_ball && l1_count > 0) {
    const auto& coords = g.l1_ball->coords;
    const auto k = static_cast<Eigen::Index>(coords.size());
    for (Eigen::Index i = 0; i < k; ++i) {
      const double xi = x(coords[static_cast<std::size_t>(i)]);
      if (l1_split) {
        out(l1_offset + i) = std::max(xi, 0.0);
        out(l1_offset + k + i) = std::max(-xi, 0.0);
      } else {
        out(l1_offset + i) = std::abs(xi);
      }
    }
  }
  if (g.hinge_budget && hinge_count > 0) {
    const auto& hb = *g.hinge_budget;
    for (Eigen::Index i = 0; i < hinge_count; ++i) {
      out(hinge_offset + i) = std::max(x(hb.coords[static_cast<std::size_t>(i)]) - hb.kink(i), 0.0);
    }
  }
  return out;
}

CanonicalQPPieces canonicalize(const StructuredFunction& g, bool include_l1_split) {
  g.validate();
  CanonicalQPPieces c;
  const Eigen::Index n = g.dim;
  c.dim = n;
  c.l1_split = include_l1_split;
  c.l1_offset = n;
  if (g.l1_ball) {
    const auto k = static_cast<Eigen::Index>(g.l1_ball->coords.size());
    c.l1_count = include_l1_split ? 2 * k : k;
  }
  c.hinge_offset = c.l1_offset + c.l1_count;
  if (g.hinge_budget) c.hinge_count = static_cast<Eigen::Index>(g.hinge_budget->coords.size());
  c.lifted_dim = c.hinge_offset + c.hinge_count;
  const Eigen::Index N = c.lifted_dim;

  c.linear = Vector::Zero(N);
  if (g.linear_cost) c.linear.head(n) = *g.linear_cost;
  const Eigen::Index p = g.quad_factor ? g.quad_factor->cols() : 0;
  c.quad_factor = Matrix::Zero(N, p);
  if (p > 0) c.quad_factor.topRows(n) = *g.quad_factor;

  RowBlock eq(N), ineq(N);

  if (g.box) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isfinite(g.box->lower(j))) ineq.at(ineq.add_row(-g.box->lower(j)), j) = -1.0;
      if (std::isfinite(g.box->upper(j))) ineq.at(ineq.add_row(g.box->upper(j)), j) = 1.0;
    }
  }
  for (Eigen::Index j : g.nonneg) ineq.at(ineq.add_row(0.0), j) = -1.0;
  if (g.simplex) {
    const Eigen::Index row = eq.add_row(1.0);
    for (Eigen::Index j : g.simplex->coords) {
      eq.at(row, j) = 1.0;
      ineq.at(ineq.add_row(0.0), j) = -1.0;
    }
  }
  if (g.equalities) eq.append(g.equalities->A, g.equalities->b);
  if (g.inequalities) ineq.append(g.inequalities->C, g.inequalities->d);

  if (g.l1_ball) {
    const auto& coords = g.l1_ball->coords;
    const auto k = static_cast<Eigen::Index>(coords.size());
    if (include_l1_split) {
      // x_S - u + v = 0, u >= 0, v >= 0, 1^T (u + v) <= L.
      for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index row = eq.add_row(0.0);
        eq.at(row, coords[static_cast<std::size_t>(i)]) = 1.0;
        eq.at(row, c.l1_offset + i) = -1.0;
        eq.at(row, c.l1_offset + k + i) = 1.0;
      }
      for (Eigen::Index i = 0; i < 2 * k; ++i) ineq.at(ineq.add_row(0.0), c.l1_offset + i) = -1.0;
      const Eigen::Index row = ineq.add_row(g.l1_ball->radius);
      for (Eigen::Index i = 0; i < 2 * k; ++i) ineq.at(row, c.l1_offset + i) = 1.0;
    } else {
      // x_S - t <= 0, -x_S - t <= 0, 1^T t <= L.
      for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index j = coords[static_cast<std::size_t>(i)];
        Eigen::Index row = ineq.add_row(0.0);
        ineq.at(row, j) = 1.0;
        ineq.at(row, c.l1_offset + i) = -1.0;
        row = ineq.add_row(0.0);
        ineq.at(row, j) = -1.0;
        ineq.at(row, c.l1_offset + i) = -1.0;
      }
      const Eigen::Index row = ineq.add_row(g.l1_ball->radius);
      for (Eigen::Index i = 0; i < k; ++i) ineq.at(row, c.l1_offset + i) = 1.0;
    }
  }

  if (g.hinge_budget) {
    // e >= 0, e >= x_S - kink, linear^T x_S + hinge^T e <= budget.
    const auto& hb = *g.hinge_budget;
    for (Eigen::Index i = 0; i < c.hinge_count; ++i) {
      const Eigen::Index e = c.hinge_offset + i;
      ineq.at(ineq.add_row(0.0), e) = -1.0;
      const Eigen::Index row = ineq.add_row(hb.kink(i));
      ineq.at(row, hb.coords[static_cast<std::size_t>(i)]) = 1.0;
      ineq.at(row, e) = -1.0;
    }
    const Eigen::Index row = ineq.add_row(hb.budget);
    for (Eigen::Index i = 0; i < c.hinge_count; ++i) {
      ineq.at(row, hb.coords[static_cast<std::size_t>(i)]) += hb.linear(i);
      ineq.at(row, c.hinge_offset + i) = hb.hinge(i);
    }
  }

  eq.finish(c.eq_matrix, c.eq_rhs);
  ineq.finish(c.ineq_matrix, c.ineq_rhs);
  return c;
}

Vector project_onto_domain(const StructuredFunction& g, const Vector& target) {
  if (target.size() != g.dim) throw Error(ErrorCode::DimensionMismatch, "project: dim mismatch");
  const CanonicalQPPieces c = canonicalize(g);
  QpProblem qp;
  qp.quad_factor = Matrix(c.lifted_dim, 0);
  qp.quad_diag = Vector::Zero(c.lifted_dim);
  qp.quad_diag.head(c.dim).setOnes();
  qp.linear = Vector::Zero(c.lifted_dim);
  qp.linear.head(c.dim) = -target;
  qp.eq_matrix = c.eq_matrix;
  qp.eq_rhs = c.eq_rhs;
  qp.ineq_matrix = c.ineq_matrix;
  qp.ineq_rhs = c.ineq_rhs;
  const QpSolution sol = solve_qp(qp);
  if (sol.status != QpStatus::Optimal) {
    throw Error(ErrorCode::SubproblemFailed,
                std::string("project: QP status ") + std::string(to_string(sol.status)));
  }
  return c.restrict(sol.x);
}

FeasiblePointSampler::FeasiblePointSampler(const StructuredFunction& g, const Vector& center,
                                           int anchors, std::uint64_t seed) {
  if (center.size() != g.dim) throw Error(ErrorCode::DimensionMismatch, "sampler: dim mismatch");
  Rng rng(seed, 0x5a);
  const double scale = 1.0 + (center.size() > 0 ? center.lpNorm<Eigen::Infinity>() : 0.0);
  anchors_.reserve(static_cast<std::size_t>(std::max(anchors, 0)));
  for (int a = 0; a < anchors; ++a) {
    Vector target(g.dim);
    for (Eigen::Index j = 0; j < g.dim; ++j) target(j) = center(j) + scale * rng.normal();
    anchors_.push_back(g.has_constraints() ? project_onto_domain(g, target) : target);
  }
}

Vector FeasiblePointSampler::sample(const Vector& base, Rng& rng) const {
  if (anchors_.empty()) return base;
  // Random convex weights (exponential spacings) over the anchors.
  Vector mix = Vector::Zero(base.size());
  double total = 0.0;
  for (const Vector& a : anchors_) {
    const double w = -std::log(1.0 - rng.uniform());
    mix += w * a;
    total += w;
  }
  mix /= total;
  // Contract toward the base point with a log-uniform factor in [1e-4, 1].
  const double theta = std::pow(10.0, -4.0 * rng.uniform());
  return base + theta * (mix - base);
}

double subgradient_valid(const StructuredFunction& g, const Vector& x, const Vector& q, int probes,
                         const FeasiblePointSampler* sampler, std::uint64_t seed) {
  const double gx = eval_g(g, x);
  if (!std::isfinite(gx)) throw Error(ErrorCode::InfeasibleBase, "subgradient_valid: g(x) = +inf");
  if (q.size() != g.dim) throw Error(ErrorCode::DimensionMismatch, "subgradient_valid: dim(q) != n");
  std::optional<FeasiblePointSampler> own;
  if (sampler == nullptr) {
    own.emplace(g, x, 16, seed);
    sampler = &*own;
  }
  Rng rng(seed, 0x51);
  double worst = -kInf;
  for (int i = 0; i < probes; ++i) {
    const Vector u = sampler->sample(x, rng);
    const double gu = eval_g(g, u);
    if (!std::isfinite(gu)) continue;  // cannot violate the inequality
    worst = std::max(worst, gx + q.dot(u - x) - gu);
  }
  return worst;
}

}  // namespace osmm
