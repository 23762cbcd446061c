#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace osmm::testing {

Vector project_simplex_sorted(const Vector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

std::optional<Vector> qp_active_set_enumeration(const QpProblem& qp) {
  const Eigen::Index n = qp.dim();
  const Eigen::Index me = qp.eq_matrix.rows();
  const Eigen::Index mi = qp.ineq_matrix.rows();
  const Matrix P = qp.hessian();
  constexpr double kFeasTol = 1e-9;

  std::optional<Vector> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << mi); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const Eigen::Index ma = static_cast<Eigen::Index>(active.size());
    if (me + ma > n) continue;
    const Eigen::Index size = n + me + ma;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(size, size);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
    K.topLeftCorner(n, n) = P;
    rhs.head(n) = -qp.linear;
    for (Eigen::Index e = 0; e < me; ++e) {
      K.block(n + e, 0, 1, n) = qp.eq_matrix.row(e);
      K.block(0, n + e, n, 1) = qp.eq_matrix.row(e).transpose();
      rhs(n + e) = qp.eq_rhs(e);
    }
    for (Eigen::Index a = 0; a < ma; ++a) {
      const Eigen::Index row = n + me + a;
      K.block(row, 0, 1, n) = qp.ineq_matrix.row(active[a]);
      K.block(0, row, n, 1) = qp.ineq_matrix.row(active[a]).transpose();
      rhs(row) = qp.ineq_rhs(active[a]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < size) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    bool ok = true;
    for (Eigen::Index a = 0; a < ma && ok; ++a) ok = sol(n + me + a) >= -kFeasTol;
    if (mi > 0 && ok) ok = (qp.ineq_matrix * x - qp.ineq_rhs).maxCoeff() <= kFeasTol;
    if (!ok) continue;
    const double obj = qp.objective(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

double kkt_residual(const QpProblem& qp, const Vector& x, const Vector& y, const Vector& z) {
  Vector stationarity = qp.hessian() * x + qp.linear;
  double worst = 0.0;
  if (qp.eq_matrix.rows() > 0) {
    stationarity += qp.eq_matrix.transpose() * y;
    worst = std::max(worst, (qp.eq_matrix * x - qp.eq_rhs).lpNorm<Eigen::Infinity>());
  }
  if (qp.ineq_matrix.rows() > 0) {
    stationarity += qp.ineq_matrix.transpose() * z;
    const Vector slack = qp.ineq_rhs - qp.ineq_matrix * x;
    worst = std::max(worst, std::max(0.0, -slack.minCoeff()));
    worst = std::max(worst, std::max(0.0, -z.minCoeff()));
    worst = std::max(worst, (z.array() * slack.array()).abs().maxCoeff());
  }
  return std::max(worst, stationarity.lpNorm<Eigen::Infinity>());
}

QpProblem random_feasible_qp(Eigen::Index n, Eigen::Index m, Eigen::Index me, Rng& rng,
                             bool strictly_convex) {
  QpProblem qp = QpProblem::zeros(n);
  const Eigen::Index p = std::max<Eigen::Index>(1, n / 2);
  qp.quad_factor = Matrix(n, p);
  for (Eigen::Index i = 0; i < qp.quad_factor.size(); ++i) qp.quad_factor.data()[i] = rng.normal();
  if (strictly_convex) qp.quad_diag = Vector::Constant(n, 0.1);
  for (Eigen::Index i = 0; i < n; ++i) qp.linear(i) = rng.normal();
  Vector interior(n);
  for (Eigen::Index i = 0; i < n; ++i) interior(i) = rng.normal();
  qp.ineq_matrix = Matrix(m, n);
  qp.ineq_rhs = Vector(m);
  for (Eigen::Index i = 0; i < qp.ineq_matrix.size(); ++i) qp.ineq_matrix.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < m; ++i) {
    qp.ineq_rhs(i) = qp.ineq_matrix.row(i).dot(interior) + rng.uniform(0.05, 1.0);
  }
  qp.eq_matrix = Matrix(me, n);
  for (Eigen::Index i = 0; i < qp.eq_matrix.size(); ++i) qp.eq_matrix.data()[i] = rng.normal();
  qp.eq_rhs = qp.eq_matrix * interior;
  return qp;
}

namespace {

double cvar_at(const Vector& losses, double eta, double alpha) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < losses.size(); ++i) sum += std::max(losses(i) - alpha, 0.0);
  return alpha + sum / (static_cast<double>(losses.size()) * (1.0 - eta));
}

double evar_at(const Vector& losses, double eta, double alpha) {
  const double top = losses.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < losses.size(); ++i) sum += std::exp((losses(i) - top) / alpha);
  const double mean = sum / static_cast<double>(losses.size());
  return top + alpha * (std::log(mean) - std::log1p(-eta));
}

}  // namespace

double cvar_bruteforce(const Vector& losses, double eta) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    best = std::min(best, cvar_at(losses, eta, losses(i)));
  }
  const double lo = losses.minCoeff();
  const double hi = losses.maxCoeff();
  constexpr int kGrid = 2000;
  for (int k = 0; k <= kGrid; ++k) {
    best = std::min(best, cvar_at(losses, eta, lo + (hi - lo) * k / kGrid));
  }
  return best;
}

double evar_bruteforce(const Vector& losses, double eta) {
  const double range = std::max(losses.maxCoeff() - losses.minCoeff(), 1e-12);
  // The infimum over alpha -> 0 is max(losses).
  double best = losses.maxCoeff();
  double lo = std::log(range * 1e-8);
  double hi = std::log(range * 1e8);
  constexpr int kGrid = 2000;
  // Dense log grid, then three zooms onto the neighbourhood of the best node.
  for (int zoom = 0; zoom < 4; ++zoom) {
    int best_k = 0;
    double best_here = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kGrid; ++k) {
      const double v = evar_at(losses, eta, std::exp(lo + (hi - lo) * k / kGrid));
      if (v < best_here) {
        best_here = v;
        best_k = k;
      }
    }
    best = std::min(best, best_here);
    const double step = (hi - lo) / kGrid;
    const double centre = lo + step * best_k;
    lo = centre - step;
    hi = centre + step;
  }
  return best;
}

double var_sorted(const Vector& losses, double eta) {
  std::vector<double> sorted(losses.data(), losses.data() + losses.size());
  std::sort(sorted.begin(), sorted.end());
  const auto N = static_cast<double>(sorted.size());
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    if (static_cast<double>(k) / N >= eta - 1e-12) return sorted[k - 1];
  }
  return sorted.back();
}

double kelly_value(const Matrix& returns, const Vector& pi, const Vector& x) {
  const Vector growth = returns * x;
  if (growth.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  double v = 0.0;
  for (Eigen::Index i = 0; i < growth.size(); ++i) v -= pi(i) * std::log(growth(i));
  return v;
}

KellyReference kelly_projected_descent(const Matrix& returns, const Vector& pi) {
  const Eigen::Index n = returns.cols();
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  auto gradient = [&](const Vector& at) {
    const Vector growth = returns * at;
    return Vector(-(returns.transpose() * (pi.array() / growth.array()).matrix()));
  };
  double fx = kelly_value(returns, pi, x);
  double step = 1.0;
  for (int it = 0; it < 1000000; ++it) {
    const Vector grad = gradient(x);
    if ((x - project_simplex_sorted(x - grad)).norm() <= 1e-14) break;
    bool moved = false;
    for (;;) {
      const Vector trial = project_simplex_sorted(x - step * grad);
      const Vector d = trial - x;
      const double ft = kelly_value(returns, pi, trial);
      if (ft <= fx + grad.dot(d) + d.squaredNorm() / (2.0 * step)) {
        moved = d.norm() > 0.0;
        x = trial;
        fx = ft;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    step *= 2.0;
  }
  return {x, fx};
}

}  // namespace osmm::testing
