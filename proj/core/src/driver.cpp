#include "osmm/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace osmm {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::GapConverged: return "GapConverged";
    case SolveStatus::ResidualConverged: return "ResidualConverged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LineSearchStalled: return "LineSearchStalled";
  }
  return "Unknown";
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
  };
  require(memory >= 1, "config: memory must be >= 1");
  require(rank >= 0, "config: rank must be >= 0");
  require(ls_alpha > 0.0 && ls_alpha < 1.0, "config: line-search alpha must lie in (0,1)");
  require(ls_beta > 0.0 && ls_beta < 1.0, "config: line-search beta must lie in (0,1)");
  require(max_halvings >= 0, "config: max_halvings must be >= 0");
  require(tau_min > 0.0, "config: tau_min must be positive");
  require(gamma_dec > 0.0 && gamma_dec < 1.0, "config: gamma_dec must lie in (0,1)");
  require(gamma_inc > 1.0, "config: gamma_inc must exceed 1");
  require(mu_min > 0.0 && mu_min <= mu_max, "config: need 0 < mu_min <= mu_max");
  require(mu0 >= mu_min && mu0 <= mu_max, "config: mu0 must lie in [mu_min, mu_max]");
  require(eps_gap_abs >= 0.0 && eps_gap_rel >= 0.0, "config: gap tolerances must be >= 0");
  require(eps_res_abs >= 0.0 && eps_res_rel >= 0.0, "config: residual tolerances must be >= 0");
  require(max_iters >= 0, "config: max_iters must be >= 0");
  require(lower_bound_every >= 1, "config: lower_bound_every must be >= 1");
  require(rho >= 0.0, "config: rho must be >= 0");
  require(!(rho > 0.0 && floor.has_value()),
          "config: the floor cannot be combined with a strongly convex minorant");
}

namespace {

/// Column/row layout of the epigraph subproblem built on top of a
/// canonicalized g: variables are [lifted x | z].
struct EpigraphQp {
  QpProblem qp;
  Eigen::Index z_index = 0;
  Eigen::Index epi_start = 0;
  Eigen::Index epi_rows = 0;
  Eigen::Index box_start = 0;
  Eigen::Index box_rows = 0;
};

EpigraphQp assemble(const Bundle& bundle, const CanonicalQPPieces& canon, const Matrix* G,
                    const Vector* x_k, double lambda) {
  const EpigraphRows rows = bundle.epigraph_rows();
  const Eigen::Index n = canon.dim;
  if (rows.slopes.cols() != n) throw Error(ErrorCode::DimensionMismatch, "bundle dim != n");
  const Eigen::Index N = canon.lifted_dim + 1;
  EpigraphQp out;
  out.z_index = N - 1;
  QpProblem& qp = out.qp;

  const Eigen::Index p = canon.quad_factor.cols();
  const Eigen::Index r = G ? G->cols() : 0;
  qp.quad_factor = Matrix::Zero(N, p + r);
  if (p > 0) qp.quad_factor.topLeftCorner(canon.lifted_dim, p) = canon.quad_factor;
  if (r > 0) qp.quad_factor.block(0, p, n, r) = *G;

  qp.quad_diag = Vector::Zero(N);
  qp.quad_diag.head(n).setConstant(lambda + rows.rho);

  qp.linear = Vector::Zero(N);
  qp.linear.head(canon.lifted_dim) = canon.linear;
  qp.linear(out.z_index) = 1.0;
  if (x_k != nullptr) {
    Vector shift = lambda * *x_k;
    if (r > 0) shift.noalias() += *G * (G->transpose() * *x_k);
    qp.linear.head(n) -= shift;
  }

  qp.eq_matrix = Matrix::Zero(canon.eq_matrix.rows(), N);
  qp.eq_matrix.leftCols(canon.lifted_dim) = canon.eq_matrix;
  qp.eq_rhs = canon.eq_rhs;

  std::vector<std::pair<Eigen::Index, double>> box_entries;  // (signed column + 1, rhs)
  if (rows.box) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isfinite(rows.box->lower(j))) box_entries.emplace_back(-(j + 1), -rows.box->lower(j));
      if (std::isfinite(rows.box->upper(j))) box_entries.emplace_back(j + 1, rows.box->upper(j));
    }
  }
  const Eigen::Index mg = canon.ineq_matrix.rows();
  out.epi_start = mg;
  out.epi_rows = rows.slopes.rows();
  out.box_start = mg + out.epi_rows;
  out.box_rows = static_cast<Eigen::Index>(box_entries.size());
  const Eigen::Index mi = mg + out.epi_rows + out.box_rows;
  qp.ineq_matrix = Matrix::Zero(mi, N);
  qp.ineq_rhs = Vector::Zero(mi);
  if (mg > 0) {
    qp.ineq_matrix.topLeftCorner(mg, canon.lifted_dim) = canon.ineq_matrix;
    qp.ineq_rhs.head(mg) = canon.ineq_rhs;
  }
  // a_i^T x - z <= -b_i
  for (Eigen::Index i = 0; i < out.epi_rows; ++i) {
    qp.ineq_matrix.row(out.epi_start + i).head(n) = rows.slopes.row(i);
    qp.ineq_matrix(out.epi_start + i, out.z_index) = -1.0;
    qp.ineq_rhs(out.epi_start + i) = -rows.offsets(i);
  }
  for (Eigen::Index i = 0; i < out.box_rows; ++i) {
    const auto [signed_col, rhs] = box_entries[static_cast<std::size_t>(i)];
    const Eigen::Index col = std::abs(signed_col) - 1;
    qp.ineq_matrix(out.box_start + i, col) = signed_col > 0 ? 1.0 : -1.0;
    qp.ineq_rhs(out.box_start + i) = rhs;
  }
  return out;
}

double rms(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.norm() / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

TentativeStep tentative_step(const Bundle& bundle, const CurvatureModel& curvature,
                             const CanonicalQPPieces& canon, const Vector& x_k, double lambda,
                             const QpSettings& settings) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, "tentative_step: empty bundle");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "tentative_step: lambda must be > 0");
  if (x_k.size() != canon.dim || curvature.dim() != canon.dim) {
    throw Error(ErrorCode::DimensionMismatch, "tentative_step: dimension mismatch");
  }
  const EpigraphQp eq = assemble(bundle, canon, &curvature.factor(), &x_k, lambda);
  const QpSolution sol = solve_qp(eq.qp, settings);
  if (sol.status != QpStatus::Optimal) {
    throw Error(ErrorCode::SubproblemFailed,
                std::string("tentative step: QP status ") + std::string(to_string(sol.status)));
  }
  TentativeStep step;
  step.x_half = canon.restrict(sol.x);
  step.z_half = sol.x(eq.z_index);
  step.gamma = sol.ineq_duals.segment(eq.epi_start, eq.epi_rows);
  step.box_normal = Vector::Zero(canon.dim);
  for (Eigen::Index i = 0; i < eq.box_rows; ++i) {
    const Eigen::Index row = eq.box_start + i;
    step.box_normal += sol.ineq_duals(row) * eq.qp.ineq_matrix.row(row).head(canon.dim).transpose();
  }
  step.qp_iterations = sol.iterations;
  return step;
}

TentativeStep tentative_step(const Bundle& bundle, const CurvatureModel& curvature,
                             const StructuredFunction& g, const Vector& x_k, double lambda,
                             const QpSettings& settings) {
  return tentative_step(bundle, curvature, canonicalize(g), x_k, lambda, settings);
}

Vector recover_subgradient(const Vector& gamma, const Bundle& bundle,
                           const CurvatureModel& curvature, double lambda, const Vector& v,
                           const Vector& x_half, const Vector* box_normal) {
  const EpigraphRows rows = bundle.epigraph_rows();
  if (gamma.size() != rows.slopes.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "recover_subgradient: one weight per epigraph row");
  }
  if (std::abs(gamma.sum() - 1.0) > 1e-6) {
    throw Error(ErrorCode::DualSumMismatch, "recover_subgradient: dual weights do not sum to 1");
  }
  const Eigen::Index pieces = rows.piece_rows();
  // Gradient of each piece at x_half is a_i + rho x_half; the floor row is flat.
  Vector q = -(rows.slopes.topRows(pieces).transpose() * gamma.head(pieces));
  if (rows.rho > 0.0) q -= rows.rho * gamma.head(pieces).sum() * x_half;
  if (box_normal != nullptr && box_normal->size() == q.size()) q -= *box_normal;
  q -= curvature.apply(v) + lambda * v;
  return q;
}

LineSearchResult line_search(Oracle& oracle, const StructuredFunction& g, const Vector& x_k,
                             const Vector& v, double f_k, double g_k, double g_half, double quad,
                             double alpha, double beta, int max_halvings) {
  const double h_k = f_k + g_k;
  LineSearchResult res;
  double t = 1.0;
  for (int j = 0; j <= max_halvings; ++j, t *= beta) {
    const Vector x_t = x_k + t * v;
    const double f_t = oracle.value(x_t);
    ++res.evals;
    if (!std::isfinite(f_t)) continue;
    const double phi = f_t + t * g_half + (1.0 - t) * g_k;
    if (!(phi <= h_k - 0.5 * alpha * t * quad) || !(phi < h_k)) continue;
    // Guard against rounding in the chord: the true objective must drop too.
    const double g_t = eval_g(g, x_t);
    if (!(f_t + g_t < h_k)) continue;
    res.t = t;
    res.f_new = f_t;
    res.g_new = g_t;
    res.phi = phi;
    return res;
  }
  throw Error(ErrorCode::LineSearchStalled, "line search: no acceptable step after " +
                                                std::to_string(max_halvings) + " halvings");
}

TrustState trust_update(const SolverConfig& config, double mu, double t, double tau_next) {
  TrustState s;
  s.mu = (t == 1.0) ? std::max(config.gamma_dec * mu, config.mu_min)
                    : std::min(config.gamma_inc * mu, config.mu_max);
  s.lambda = s.mu * (tau_next + config.tau_min);
  return s;
}

std::optional<double> lower_bound(const Bundle& bundle, const CanonicalQPPieces& canon,
                                  const QpSettings& settings) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, "lower_bound: empty bundle");
  const EpigraphQp eq = assemble(bundle, canon, nullptr, nullptr, 0.0);
  const QpSolution sol = solve_qp(eq.qp, settings);
  switch (sol.status) {
    case QpStatus::Optimal: return sol.objective;
    case QpStatus::Unbounded: return -kInf;
    case QpStatus::Infeasible:
      throw Error(ErrorCode::SubproblemFailed, "lower bound: structured part is infeasible");
    case QpStatus::MaxIters: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> lower_bound(const Bundle& bundle, const StructuredFunction& g,
                                  const QpSettings& settings) {
  return lower_bound(bundle, canonicalize(g), settings);
}

SolveReport solve(Oracle& oracle, const StructuredFunction& g, const Vector& x0,
                  const SolverConfig& config) {
  config.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  auto elapsed = [&clock_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  };
  const Eigen::Index n = g.dim;
  if (x0.size() != n || oracle.dim() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve: x0, oracle and g dimensions differ");
  }
  const CanonicalQPPieces canon = canonicalize(g, config.l1_split);
  const std::int64_t value_calls0 = oracle.value_calls();
  const std::int64_t grad_calls0 = oracle.gradient_calls();

  Vector x = x0;
  OracleEval ev = oracle.evaluate(x);
  double g_x = eval_g(g, x);
  if (!ev.finite() || !std::isfinite(g_x)) {
    throw Error(ErrorCode::InfeasibleStart, "solve: h(x0) is +inf");
  }
  double f_x = ev.value;
  Vector grad = std::move(*ev.gradient);

  Bundle bundle(config.memory, config.rho, config.minorant_box, config.floor);
  bundle.push({x, f_x, grad});
  CurvatureModel curvature(n, config.rank, config.curvature_eps_abs, config.curvature_eps_rel);
  TrustState trust{config.mu0, config.mu0 * (curvature.tau() + config.tau_min)};

  SolveReport report;
  double best_bound = -kInf;
  int bound_computed_at = -1;

  auto refresh_bound = [&](int k) {
    if (bound_computed_at == k) return;
    bound_computed_at = k;
    const std::optional<double> ell = lower_bound(bundle, canon, config.qp);
    if (ell && *ell > best_bound) best_bound = *ell;
  };
  auto gap_tolerance = [&](const Vector& at, double f_at, double h_at) {
    double eps_abs = config.eps_gap_abs;
    if (config.use_validation && oracle.has_validation()) {
      const double f_val = oracle.validation_value(at);
      if (std::isfinite(f_val)) eps_abs = std::max(eps_abs, std::abs(f_val - f_at));
    }
    return eps_abs + config.eps_gap_rel * std::abs(h_at);
  };
  auto fill_bound = [&](IterRecord& rec) {
    rec.lower_bound = best_bound;
    rec.gap = std::isfinite(best_bound) ? rec.h - best_bound : kInf;
  };

  {
    refresh_bound(0);
    IterRecord rec;
    rec.k = 0;
    rec.f = f_x;
    rec.g = g_x;
    rec.h = f_x + g_x;
    rec.lambda = trust.lambda;
    rec.mu = trust.mu;
    rec.r1 = curvature.r1();
    rec.f_evals = (oracle.value_calls() - value_calls0) + (oracle.gradient_calls() - grad_calls0);
    fill_bound(rec);
    rec.time_s = elapsed();
    report.records.push_back(rec);
  }

  auto finalize = [&](SolveStatus status) {
    const int k = report.records.back().k;
    refresh_bound(k);
    fill_bound(report.records.back());
    if ((status == SolveStatus::MaxIters || status == SolveStatus::LineSearchStalled) &&
        std::isfinite(best_bound) &&
        report.records.back().gap <= gap_tolerance(x, f_x, f_x + g_x)) {
      // The bound at the final iterate certifies the gap after all.
      status = SolveStatus::GapConverged;
    }
    report.status = status;
    report.x = x;
    report.f = f_x;
    report.g = g_x;
    report.h = f_x + g_x;
    report.lower_bound = best_bound;
    report.f_value_calls = oracle.value_calls() - value_calls0;
    report.f_grad_calls = oracle.gradient_calls() - grad_calls0;
    report.wall_time_s = elapsed();
    report.records.back().time_s = report.wall_time_s;
    return report;
  };

  for (int k = 0; k < config.max_iters; ++k) {
    const std::int64_t calls_before = oracle.value_calls() + oracle.gradient_calls();
    const TentativeStep step = tentative_step(bundle, curvature, canon, x, trust.lambda, config.qp);
    const Vector v = step.x_half - x;
    std::vector<bool> active;
    if (config.observer) {
      // Rows whose slack at the subproblem solution is negligible.
      const EpigraphRows rows = bundle.epigraph_rows();
      const Vector model = rows.slopes * step.x_half + rows.offsets;
      const double tol = 1e-4 * (1.0 + std::abs(step.z_half));
      for (Eigen::Index i = 0; i < model.size(); ++i) {
        active.push_back(step.z_half - model(i) <= tol);
      }
    }
    const Vector q = recover_subgradient(step.gamma, bundle, curvature, trust.lambda, v,
                                         step.x_half, &step.box_normal);

    if (v.norm() <= 1e-10 * (1.0 + x.norm())) {
      // Fixed point of the tentative update: x is optimal.
      report.records.back().rms_residual = rms(grad + q);
      return finalize(SolveStatus::ResidualConverged);
    }

    const double g_half = eval_g(g, step.x_half);
    if (!std::isfinite(g_half)) {
      throw Error(ErrorCode::SubproblemFailed,
                  "tentative step: solution violates the structured constraints");
    }
    const double quad = curvature.apply_factor(v).squaredNorm() + trust.lambda * v.squaredNorm();

    LineSearchResult ls;
    try {
      ls = line_search(oracle, g, x, v, f_x, g_x, g_half, quad, config.ls_alpha, config.ls_beta,
                       config.max_halvings);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LineSearchStalled) throw;
      return finalize(SolveStatus::LineSearchStalled);
    }

    const Vector x_new = x + ls.t * v;
    OracleEval ev_new = oracle.evaluate(x_new);
    if (!ev_new.finite()) {
      throw Error(ErrorCode::NonFiniteOracle, "solve: oracle lost its value at an accepted point");
    }
    const Vector grad_new = std::move(*ev_new.gradient);
    curvature.update(x_new - x, grad_new - grad);
    bundle.push({x_new, ev_new.value, grad_new});

    std::optional<double> residual;
    if (ls.t == 1.0) residual = rms(grad_new + q);
    const bool residual_stop =
        residual && *residual <= config.eps_res_abs +
                                     config.eps_res_rel * (rms(grad_new) + rms(q));

    if (config.observer) {
      StepDiagnostics d;
      d.k = k;
      d.x = x;
      d.f = f_x;
      d.g = g_x;
      d.grad = grad;
      d.x_half = step.x_half;
      d.z_half = step.z_half;
      d.g_half = g_half;
      d.v = v;
      d.gamma = step.gamma;
      d.active = std::move(active);
      d.lambda = trust.lambda;
      d.quad = quad;
      d.q = q;
      d.t = ls.t;
      d.phi = ls.phi;
      d.f_new = ev_new.value;
      d.g_new = ls.g_new;
      d.x_new = x_new;
      d.tau = curvature.tau();
      d.alpha = config.ls_alpha;
      config.observer(d);
    }

    const TrustState next = trust_update(config, trust.mu, ls.t, curvature.tau());

    x = x_new;
    f_x = ev_new.value;
    g_x = ls.g_new;
    grad = grad_new;
    trust = next;

    const int k_next = k + 1;
    const bool cadence = (k_next % config.lower_bound_every) == 0;
    if (cadence) refresh_bound(k_next);

    IterRecord rec;
    rec.k = k_next;
    rec.f = f_x;
    rec.g = g_x;
    rec.h = f_x + g_x;
    rec.rms_residual = residual;
    rec.t = ls.t;
    rec.lambda = trust.lambda;
    rec.mu = trust.mu;
    rec.r1 = curvature.r1();
    rec.f_evals = oracle.value_calls() + oracle.gradient_calls() - calls_before;
    fill_bound(rec);
    rec.time_s = elapsed();
    report.records.push_back(rec);

    if (residual_stop) return finalize(SolveStatus::ResidualConverged);
    if (cadence && std::isfinite(best_bound) && rec.gap <= gap_tolerance(x, f_x, rec.h)) {
      return finalize(SolveStatus::GapConverged);
    }
  }
  return finalize(SolveStatus::MaxIters);
}

}  // namespace osmm
