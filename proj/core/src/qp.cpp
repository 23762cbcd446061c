#include "osmm/qp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace osmm {

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Unbounded: return "Unbounded";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::MaxIters: return "MaxIters";
  }
  return "Unknown";
}

QpProblem QpProblem::zeros(Eigen::Index n) {
  QpProblem qp;
  qp.quad_factor = Matrix(n, 0);
  qp.linear = Vector::Zero(n);
  qp.eq_matrix = Matrix(0, n);
  qp.eq_rhs = Vector(0);
  qp.ineq_matrix = Matrix(0, n);
  qp.ineq_rhs = Vector(0);
  return qp;
}

Matrix QpProblem::hessian() const {
  const Eigen::Index n = dim();
  Matrix P = Matrix::Zero(n, n);
  if (quad_factor.cols() > 0) P.noalias() += quad_factor * quad_factor.transpose();
  if (quad_diag.size() == n) P.diagonal() += quad_diag;
  return P;
}

double QpProblem::objective(const Vector& x) const {
  double v = linear.dot(x);
  if (quad_factor.cols() > 0) v += 0.5 * (quad_factor.transpose() * x).squaredNorm();
  if (quad_diag.size() == x.size()) v += 0.5 * (quad_diag.array() * x.array().square()).sum();
  return v;
}

void QpProblem::validate() const {
  const Eigen::Index n = dim();
  auto fail = [](const char* what) { throw Error(ErrorCode::DimensionMismatch, what); };
  if (quad_factor.rows() != n && !(quad_factor.size() == 0)) fail("qp: quad_factor rows != n");
  if (quad_diag.size() != 0 && quad_diag.size() != n) fail("qp: quad_diag size != n");
  if (eq_matrix.rows() != eq_rhs.size()) fail("qp: equality rows mismatch");
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != n) fail("qp: equality cols != n");
  if (ineq_matrix.rows() != ineq_rhs.size()) fail("qp: inequality rows mismatch");
  if (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n) fail("qp: inequality cols != n");
  if (quad_diag.size() == n && (quad_diag.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "qp: quad_diag must be nonnegative");
  }
  const bool finite = linear.allFinite() && quad_factor.allFinite() && eq_matrix.allFinite() &&
                      eq_rhs.allFinite() && ineq_matrix.allFinite() && ineq_rhs.allFinite() &&
                      (quad_diag.size() == 0 || quad_diag.allFinite());
  if (!finite) throw Error(ErrorCode::InvalidArgument, "qp: data must be finite");
}

namespace {

constexpr int kRefinementPasses = 3;
// Relative residual above which a Newton step is recomputed from the
// unreduced system.
constexpr double kFallbackTolerance = 1e-10;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

/// Largest a > 0 keeping v + a * dv >= 0 (+inf when dv >= 0).
double max_step(const Vector& v, const Vector& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

class KktSystem {
 public:
  KktSystem(const Matrix& H11, const Matrix& A, double base_reg) {
    const Eigen::Index n = H11.rows();
    const Eigen::Index me = A.rows();
    Matrix K = Matrix::Zero(n + me, n + me);
    K.topLeftCorner(n, n) = H11;
    if (me > 0) {
      K.bottomLeftCorner(me, n) = A;
      K.topRightCorner(n, me) = A.transpose();
    }
    constexpr std::array<double, 5> kRegLadder = {1.0, 1e1, 1e2, 1e3, 1e4};
    for (double scale : kRegLadder) {
      try {
        factor_.emplace(K, base_reg * scale, n);
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularSystem) throw;
      }
    }
    throw Error(ErrorCode::NumericalBreakdown, "qp: KKT factorization failed at maximum regularization");
  }

  void solve(const Vector& r1, const Vector& r2, Vector& dx, Vector& dy) const {
    const Eigen::Index n = r1.size();
    Vector rhs(n + r2.size());
    rhs << r1, r2;
    const Vector u = factor_->solve(rhs);
    if (!u.allFinite()) throw Error(ErrorCode::NumericalBreakdown, "qp: non-finite Newton step");
    dx = u.head(n);
    dy = u.tail(r2.size());
  }

 private:
  std::optional<LdlFactor> factor_;
};

/// Largest violation of the KKT conditions at (x, y, z) with slacks d - Cx.
double kkt_violation(const QpProblem& qp, const Matrix& P, const Vector& x, const Vector& y,
                     const Vector& z) {
  Vector stationarity = P * x + qp.linear;
  double worst = 0.0;
  if (qp.eq_matrix.rows() > 0) {
    stationarity.noalias() += qp.eq_matrix.transpose() * y;
    worst = std::max(worst, inf_norm(qp.eq_matrix * x - qp.eq_rhs));
  }
  if (qp.ineq_matrix.rows() > 0) {
    stationarity.noalias() += qp.ineq_matrix.transpose() * z;
    const Vector slack = qp.ineq_rhs - qp.ineq_matrix * x;
    worst = std::max({worst, -slack.minCoeff(), -z.minCoeff(),
                      (slack.array() * z.array()).abs().maxCoeff()});
  }
  return std::max(worst, inf_norm(stationarity));
}

/// Active-set refinement of a converged interior-point iterate. Rows with
/// z_i > s_i are treated as equalities and the resulting KKT system is
/// solved directly. The system is regularized by +-delta (degenerate vertices
/// have more active rows than variables, making it singular) and refined
/// against the exact matrix. The polished point replaces the iterate only
/// when its KKT violation is strictly smaller, so a wrong active-set guess
/// costs nothing.
void polish(const QpProblem& qp, const Matrix& P, Vector& x, Vector& y, Vector& z, Vector& s) {
  constexpr double kDelta = 1e-6;
  const Eigen::Index n = qp.dim();
  const Eigen::Index me = qp.eq_matrix.rows();
  const Eigen::Index mi = qp.ineq_matrix.rows();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < mi; ++i) {
    if (z(i) > s(i)) active.push_back(i);
  }
  const auto ma = static_cast<Eigen::Index>(active.size());
  const Eigen::Index N = n + me + ma;
  Matrix K = Matrix::Zero(N, N);
  Vector rhs(N);
  K.topLeftCorner(n, n) = P;
  rhs.head(n) = -qp.linear;
  if (me > 0) {
    K.block(n, 0, me, n) = qp.eq_matrix;
    K.block(0, n, n, me) = qp.eq_matrix.transpose();
    rhs.segment(n, me) = qp.eq_rhs;
  }
  for (Eigen::Index a = 0; a < ma; ++a) {
    const Eigen::Index row = n + me + a;
    K.row(row).head(n) = qp.ineq_matrix.row(active[static_cast<std::size_t>(a)]);
    K.col(row).head(n) = qp.ineq_matrix.row(active[static_cast<std::size_t>(a)]).transpose();
    rhs(row) = qp.ineq_rhs(active[static_cast<std::size_t>(a)]);
  }
  Matrix Kreg = K;
  Kreg.diagonal().head(n).array() += kDelta;
  Kreg.diagonal().tail(N - n).array() -= kDelta;
  const Eigen::PartialPivLU<Matrix> lu(Kreg);
  Vector u = lu.solve(rhs);
  for (int pass = 0; pass < kRefinementPasses && u.allFinite(); ++pass) u += lu.solve(rhs - K * u);
  if (!u.allFinite()) return;

  Vector px = u.head(n);
  Vector py = u.segment(n, me);
  Vector pz = Vector::Zero(mi);
  for (Eigen::Index a = 0; a < ma; ++a) pz(active[static_cast<std::size_t>(a)]) = u(n + me + a);
  if (kkt_violation(qp, P, px, py, pz) < kkt_violation(qp, P, x, y, z)) {
    x = std::move(px);
    y = std::move(py);
    z = std::move(pz);
    if (mi > 0) s = qp.ineq_rhs - qp.ineq_matrix * x;
  }
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings) {
  qp.validate();
  const Eigen::Index n = qp.dim();
  const Eigen::Index me = qp.eq_matrix.rows();
  const Eigen::Index mi = qp.ineq_matrix.rows();
  const Matrix P = qp.hessian();
  const Matrix& A = qp.eq_matrix;
  const Matrix& C = qp.ineq_matrix;
  const Vector& b = qp.eq_rhs;
  const Vector& d = qp.ineq_rhs;
  const Vector& c = qp.linear;

  const double scale_b = 1.0 + inf_norm(b);
  const double scale_d = 1.0 + inf_norm(d);
  const double scale_c = 1.0 + inf_norm(c);

  QpSolution sol;
  Vector x(n), y(me), z(mi), s(mi);

  // Starting point: least-squares solution of the KKT system with the
  // inequalities treated as equalities, then slacks/duals shifted positive.
  {
    Matrix H0 = P;
    if (mi > 0) H0.noalias() += C.transpose() * C;
    const KktSystem kkt(H0, A, settings.regularization);
    Vector r1 = -c;
    if (mi > 0) r1.noalias() += C.transpose() * d;
    kkt.solve(r1, b, x, y);
    if (mi > 0) {
      s = d - C * x;
      z = -s;
      const double shift_s = -s.minCoeff();
      if (shift_s >= 0.0) s.array() += 1.0 + shift_s;
      const double shift_z = -z.minCoeff();
      if (shift_z >= 0.0) z.array() += 1.0 + shift_z;
    }
  }

  auto finish = [&](QpStatus status, int iters) {
    sol.status = status;
    sol.x = x;
    sol.eq_duals = y;
    sol.ineq_duals = z;
    sol.slacks = s;
    sol.objective = qp.objective(x);
    sol.iterations = iters;
    return sol;
  };

  Vector rd(n), rpe(me), rpi(mi);
  for (int iter = 0; iter <= settings.max_iters; ++iter) {
    rd = P * x + c;
    if (me > 0) rd.noalias() += A.transpose() * y;
    if (mi > 0) rd.noalias() += C.transpose() * z;
    rpe = (me > 0) ? Vector(A * x - b) : Vector(0);
    rpi = (mi > 0) ? Vector(C * x + s - d) : Vector(0);

    const double pobj = qp.objective(x);
    const double sz = (mi > 0) ? s.dot(z) : 0.0;
    sol.primal_residual = std::max(inf_norm(rpe) / scale_b, inf_norm(rpi) / scale_d);
    sol.dual_residual = inf_norm(rd) / scale_c;
    sol.complementarity = sz / (1.0 + std::abs(pobj));

    if (!x.allFinite() || !z.allFinite() || !y.allFinite()) {
      throw Error(ErrorCode::NumericalBreakdown, "qp: iterate became non-finite");
    }
    if (sol.primal_residual <= settings.tol && sol.dual_residual <= settings.tol &&
        sol.complementarity <= settings.tol) {
      polish(qp, P, x, y, z, s);
      return finish(QpStatus::Optimal, iter);
    }

    // Unboundedness: a primal-feasible iterate with a hugely negative
    // objective, or a recession ray along which c decreases.
    if (sol.primal_residual <= 1e-6 && pobj < settings.unbounded_objective) {
      return finish(QpStatus::Unbounded, iter);
    }
    const double x_norm = inf_norm(x);
    if (x_norm > 1e8) {
      const Vector ray = x / x_norm;
      const bool recession = inf_norm(P * ray) <= 1e-6 &&
                             (me == 0 || inf_norm(A * ray) <= 1e-6) &&
                             (mi == 0 || (C * ray).maxCoeff() <= 1e-6);
      if (recession && c.dot(ray) < -1e-6) return finish(QpStatus::Unbounded, iter);
    }
    // Infeasibility: diverging duals forming a Farkas certificate.
    const double dual_norm = std::max(inf_norm(y), inf_norm(z));
    if (dual_norm > 1e8 && sol.primal_residual > settings.tol) {
      const Vector yh = y / dual_norm;
      const Vector zh = z / dual_norm;
      Vector at = Vector::Zero(n);
      if (me > 0) at.noalias() += A.transpose() * yh;
      if (mi > 0) at.noalias() += C.transpose() * zh;
      const double lhs = (me > 0 ? b.dot(yh) : 0.0) + (mi > 0 ? d.dot(zh) : 0.0);
      if (inf_norm(at) <= 1e-6 && lhs < -1e-6) return finish(QpStatus::Infeasible, iter);
    }
    if (iter == settings.max_iters) break;

    Matrix H = P;
    Vector w;
    if (mi > 0) {
      w = z.array() / s.array();
      H.noalias() += C.transpose() * w.asDiagonal() * C;
    }
    // Near convergence w = z ./ s spans many orders of magnitude and the
    // reduced factorization can break down; the unreduced system takes over.
    std::optional<KktSystem> kkt;
    try {
      kkt.emplace(H, A, settings.regularization);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalBreakdown) throw;
    }

    // Solves the full Newton system
    //   P dx + A'dy + C'dz = b_d,  A dx = b_e,  C dx + ds = b_i,  Z ds + S dz = b_c
    // through the reduced quasi-definite matrix, then refines against the
    // unreduced equations (which stay well scaled as s or z approach zero).
    Vector dx, dy, dz, ds;
    auto reduced_solve = [&](const Vector& b_d, const Vector& b_e, const Vector& b_i,
                             const Vector& b_c, Vector& ux, Vector& uy, Vector& uz, Vector& us) {
      Vector r1 = b_d;
      Vector aux;
      if (mi > 0) {
        aux = (b_c.array() - z.array() * b_i.array()) / s.array();
        r1.noalias() -= C.transpose() * aux;
      }
      kkt->solve(r1, b_e, ux, uy);
      if (mi > 0) {
        const Vector Cdx = C * ux;
        uz = aux.array() + w.array() * Cdx.array();
        us = b_i - Cdx;
      } else {
        uz.resize(0);
        us.resize(0);
      }
    };
    // Residual of the unreduced system at a candidate step; returns its max norm.
    auto full_residual = [&](const Vector& b_d, const Vector& b_e, const Vector& b_i,
                             const Vector& b_c, const Vector& ux, const Vector& uy,
                             const Vector& uz, const Vector& us, Vector& e_d, Vector& e_e,
                             Vector& e_i, Vector& e_c) {
      e_d = b_d - P * ux;
      if (me > 0) e_d.noalias() -= A.transpose() * uy;
      if (mi > 0) e_d.noalias() -= C.transpose() * uz;
      e_e = (me > 0) ? Vector(b_e - A * ux) : Vector(0);
      if (mi > 0) {
        e_i = b_i - C * ux - us;
        e_c = b_c.array() - z.array() * us.array() - s.array() * uz.array();
      } else {
        e_i.resize(0);
        e_c.resize(0);
      }
      return std::max({inf_norm(e_d), inf_norm(e_e), inf_norm(e_i), inf_norm(e_c)});
    };

    // Unreduced Newton matrix in the order (dx, dy, dz, ds), factored with
    // partial pivoting. Only built when the reduced solve is inaccurate: the
    // reduction adds C'WC with w spanning many orders of magnitude near a
    // degenerate solution, which swamps the small pivots.
    std::optional<Eigen::PartialPivLU<Matrix>> full_lu;
    auto full_solve = [&](const Vector& b_d, const Vector& b_e, const Vector& b_i,
                          const Vector& b_c, Vector& ux, Vector& uy, Vector& uz, Vector& us) {
      const Eigen::Index N = n + me + 2 * mi;
      if (!full_lu) {
        Matrix K = Matrix::Zero(N, N);
        K.topLeftCorner(n, n) = P;
        K.topLeftCorner(n, n).diagonal().array() += settings.regularization;
        if (me > 0) {
          K.block(0, n, n, me) = A.transpose();
          K.block(n, 0, me, n) = A;
          K.block(n, n, me, me).diagonal().array() = -settings.regularization;
        }
        if (mi > 0) {
          const Eigen::Index r3 = n + me;
          const Eigen::Index r4 = n + me + mi;
          K.block(0, r3, n, mi) = C.transpose();
          K.block(r3, 0, mi, n) = C;
          K.block(r3, r4, mi, mi).diagonal().setOnes();
          K.block(r4, r3, mi, mi).diagonal() = s;
          K.block(r4, r4, mi, mi).diagonal() = z;
        }
        full_lu.emplace(K);
      }
      Vector rhs(N);
      rhs << b_d, b_e, b_i, b_c;
      const Vector u = full_lu->solve(rhs);
      if (!u.allFinite()) throw Error(ErrorCode::NumericalBreakdown, "qp: non-finite Newton step");
      ux = u.head(n);
      uy = u.segment(n, me);
      uz = u.segment(n + me, mi);
      us = u.tail(mi);
    };

    // Solves with the given method and refines against the unreduced
    // equations. Corrections are kept only while they shrink the residual:
    // with the static regularization comparable to the true pivots the
    // refinement iteration need not contract.
    auto refined = [&](const auto& method, const Vector& b_d, const Vector& b_e,
                       const Vector& b_i, const Vector& b_c, Vector& ux, Vector& uy, Vector& uz,
                       Vector& us) {
      method(b_d, b_e, b_i, b_c, ux, uy, uz, us);
      Vector e_d, e_e, e_i, e_c;
      double err = full_residual(b_d, b_e, b_i, b_c, ux, uy, uz, us, e_d, e_e, e_i, e_c);
      for (int pass = 0; pass < kRefinementPasses && err > 0.0; ++pass) {
        Vector cx, cy, cz, cs;
        method(e_d, e_e, e_i, e_c, cx, cy, cz, cs);
        Vector nx = ux + cx;
        Vector ny = uy + cy;
        Vector nz = uz + cz;
        Vector ns = us + cs;
        Vector f_d, f_e, f_i, f_c;
        const double next = full_residual(b_d, b_e, b_i, b_c, nx, ny, nz, ns, f_d, f_e, f_i, f_c);
        if (!(next < err)) break;
        ux = std::move(nx);
        uy = std::move(ny);
        uz = std::move(nz);
        us = std::move(ns);
        e_d = std::move(f_d);
        e_e = std::move(f_e);
        e_i = std::move(f_i);
        e_c = std::move(f_c);
        err = next;
      }
      return err;
    };

    auto newton = [&](const Vector& rc) {
      const Vector b_d = -rd;
      const Vector b_e = -rpe;
      const Vector b_i = -rpi;
      const Vector b_c = -rc;
      if (!kkt) {
        refined(full_solve, b_d, b_e, b_i, b_c, dx, dy, dz, ds);
        return;
      }
      const double err = refined(reduced_solve, b_d, b_e, b_i, b_c, dx, dy, dz, ds);
      const double scale = 1.0 + std::max({inf_norm(b_d), inf_norm(b_e), inf_norm(b_i),
                                           inf_norm(b_c)});
      if (err > kFallbackTolerance * scale) {
        Vector fx, fy, fz, fs;
        const double err_full = refined(full_solve, b_d, b_e, b_i, b_c, fx, fy, fz, fs);
        if (err_full < err) {
          dx = std::move(fx);
          dy = std::move(fy);
          dz = std::move(fz);
          ds = std::move(fs);
        }
      }
    };

    if (mi == 0) {
      newton(Vector(0));
      x += dx;
      y += dy;
      continue;
    }

    const double mu = sz / static_cast<double>(mi);
    const Vector sz_vec = s.array() * z.array();
    newton(sz_vec);
    const double a_aff = std::min({1.0, max_step(s, ds), max_step(z, dz)});
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(mi);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    const Vector rc = sz_vec.array() + ds.array() * dz.array() - sigma * mu;
    newton(rc);
    const double a_max = std::min(max_step(s, ds), max_step(z, dz));
    const double alpha = std::min(1.0, settings.step_fraction * a_max);

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
  }
  return finish(QpStatus::MaxIters, settings.max_iters);
}

}  // namespace osmm
