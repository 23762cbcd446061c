#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "osmm/bundle.hpp"
#include "osmm/curvature.hpp"
#include "osmm/oracle.hpp"
#include "osmm/qp.hpp"
#include "osmm/structured.hpp"

namespace osmm {

struct StepDiagnostics;

struct SolverConfig {
  Eigen::Index memory = 20;
  Eigen::Index rank = 20;

  // Line search.
  double ls_alpha = 0.05;
  double ls_beta = 0.5;
  int max_halvings = 60;

  // Trust parameter: lambda = mu * (tau + tau_min).
  double tau_min = 1e-3;
  double gamma_dec = 0.8;
  double gamma_inc = 1.1;
  double mu_min = 1e-4;
  double mu_max = 1e5;
  double mu0 = 1.0;

  // Stopping.
  double eps_gap_abs = 1e-4;
  double eps_gap_rel = 1e-3;
  double eps_res_abs = 1e-4;
  double eps_res_rel = 1e-3;
  int max_iters = 200;
  int lower_bound_every = 10;
  /// Widen the absolute gap tolerance to |f_val(x) - f(x)| when the oracle
  /// has a validation twin.
  bool use_validation = false;

  // Optional minorant refinements (all off by default).
  double rho = 0.0;
  std::optional<Box> minorant_box;
  std::optional<double> floor;

  // Curvature thresholds.
  double curvature_eps_abs = 1e-8;
  double curvature_eps_rel = 1e-3;

  bool l1_split = true;
  // Subproblem solves run tighter than the generic QP default: the QP tolerance
  // is relative to 1 + |objective|, and the subgradient is assembled from the
  // duals, so a loose solve leaves visible weight on inactive cuts.
  QpSettings qp = {.tol = 1e-11};

  /// Called once per completed step with the full step certificate.
  std::function<void(const StepDiagnostics&)> observer;

  /// Throws InvalidArgument when a parameter is out of range.
  void validate() const;
};

enum class SolveStatus { GapConverged, ResidualConverged, MaxIters, LineSearchStalled };

std::string_view to_string(SolveStatus status);

struct IterRecord {
  int k = 0;
  double time_s = 0.0;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  double lower_bound = -kInf;  // running max; -inf when no finite bound yet
  double gap = kInf;           // h - lower_bound
  std::optional<double> rms_residual;  // only after undamped steps
  double t = 0.0;       // step length that produced this iterate (0 for k = 0)
  double lambda = 0.0;  // trust weight for the next step
  double mu = 0.0;
  Eigen::Index r1 = 0;
  std::int64_t f_evals = 0;  // oracle calls (value and value+gradient) spent on this iterate
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIters;
  Vector x;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  double lower_bound = -kInf;
  std::vector<IterRecord> records;
  std::int64_t f_value_calls = 0;
  std::int64_t f_grad_calls = 0;
  double wall_time_s = 0.0;

  int iterations() const { return records.empty() ? 0 : records.back().k; }
  double gap() const { return h - lower_bound; }
};

/// Result of the tentative (trust-region-like) subproblem.
struct TentativeStep {
  Vector x_half;
  double z_half = 0.0;
  Vector gamma;        // duals of the epigraph rows (floor row last when present)
  Vector box_normal;   // C_box^T z_box from the minorant box rows (zero when absent)
  int qp_iterations = 0;
};

/// Epigraph-form subproblem
///   minimize z + g(x) + (1/2)|G^T (x - x_k)|^2 + (lambda/2)|x - x_k|^2 + (rho/2)|x|^2
///   s.t.     z >= a_i^T x + b_i for every bundle row, x in the minorant box.
/// Throws SubproblemFailed when the QP is not solved to optimality.
TentativeStep tentative_step(const Bundle& bundle, const CurvatureModel& curvature,
                             const CanonicalQPPieces& canon, const Vector& x_k, double lambda,
                             const QpSettings& settings = {});

TentativeStep tentative_step(const Bundle& bundle, const CurvatureModel& curvature,
                             const StructuredFunction& g, const Vector& x_k, double lambda,
                             const QpSettings& settings = {});

/// q = -(sum_i gamma_i grad l_i(x_half) + box normal) - (H + lambda I) v, an
/// element of the subdifferential of g at x_half. Throws DualSumMismatch when
/// |sum gamma - 1| > 1e-6.
Vector recover_subgradient(const Vector& gamma, const Bundle& bundle,
                           const CurvatureModel& curvature, double lambda, const Vector& v,
                           const Vector& x_half, const Vector* box_normal = nullptr);

struct LineSearchResult {
  double t = 0.0;
  double f_new = kInf;
  double g_new = kInf;
  double phi = kInf;  // chord value at the accepted t
  int evals = 0;
};

/// Backtracking on phi(t) = f(x_k + t v) + t g_half + (1 - t) g_k. Accepts the
/// first t = beta^j with phi(t) <= h_k - alpha t quad / 2 whose true objective
/// h(x_k + t v) is strictly below h_k. Throws LineSearchStalled after
/// max_halvings failures.
LineSearchResult line_search(Oracle& oracle, const StructuredFunction& g, const Vector& x_k,
                             const Vector& v, double f_k, double g_k, double g_half, double quad,
                             double alpha = 0.05, double beta = 0.5, int max_halvings = 60);

struct TrustState {
  double mu = 1.0;
  double lambda = 1e-3;
};

TrustState trust_update(const SolverConfig& config, double mu, double t, double tau_next);

/// inf_x l(x) + g(x); -inf when the QP is unbounded, nullopt when the
/// interior-point solver did not reach a certified answer. Throws
/// SubproblemFailed when the QP is infeasible.
std::optional<double> lower_bound(const Bundle& bundle, const CanonicalQPPieces& canon,
                                  const QpSettings& settings = {});

std::optional<double> lower_bound(const Bundle& bundle, const StructuredFunction& g,
                                  const QpSettings& settings = {});

/// Everything needed to re-verify one step after the fact.
struct StepDiagnostics {
  int k = 0;  // index of the iterate the step started from
  Vector x;
  double f = 0.0;
  double g = 0.0;
  Vector grad;
  Vector x_half;
  double z_half = 0.0;
  double g_half = 0.0;
  Vector v;
  Vector gamma;
  std::vector<bool> active;  // per epigraph row (floor last)
  double lambda = 0.0;
  double quad = 0.0;  // v^T (H + lambda I) v
  Vector q;           // recovered subgradient of g at x_half
  double t = 0.0;
  double phi = 0.0;
  double f_new = 0.0;
  double g_new = 0.0;
  Vector x_new;
  double tau = 0.0;   // trace of the curvature model after the update, over n
  double alpha = 0.0; // line-search parameter used
};

/// Runs the full method from x0. Throws InfeasibleStart when h(x0) is
/// infinite; SubproblemFailed propagates.
SolveReport solve(Oracle& oracle, const StructuredFunction& g, const Vector& x0,
                  const SolverConfig& config = {});

}  // namespace osmm
