#include "osmm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "osmm/error.hpp"

namespace osmm {

namespace {

/// Golden-section search for the minimizer of a unimodal function on [lo, hi].
template <typename F>
double golden_section(F&& fn, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return fc <= fd ? c : d;
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "risk: eta must lie in (0,1)");
}

}  // namespace

double cvar_objective(const Vector& losses, double eta, double alpha) {
  const double excess = (losses.array() - alpha).max(0.0).sum();
  return alpha + excess / (static_cast<double>(losses.size()) * (1.0 - eta));
}

double evar_objective(const Vector& losses, double eta, double alpha) {
  if (!(alpha > 0.0)) return std::numeric_limits<double>::infinity();
  const double top = losses.maxCoeff();
  const double mean_exp = ((losses.array() - top) / alpha).exp().mean();
  return top + alpha * (std::log(mean_exp) - std::log1p(-eta));
}

EmpiricalRisks empirical_risks(const Vector& losses, double eta) {
  check_eta(eta);
  if (losses.size() == 0) throw Error(ErrorCode::InvalidArgument, "risk: empty sample");
  if (!losses.allFinite()) throw Error(ErrorCode::InvalidArgument, "risk: losses must be finite");
  const auto N = losses.size();
  std::vector<double> sorted(losses.data(), losses.data() + N);
  std::sort(sorted.begin(), sorted.end());

  EmpiricalRisks out;
  // Smallest l with (#samples <= l) / N >= eta; the 1e-9 guards eta * N
  // landing a rounding error above an integer.
  const double rank = std::ceil(eta * static_cast<double>(N) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(N))) - 1;
  out.var = sorted[idx];

  const double lo = sorted.front();
  const double hi = sorted.back();
  const double range = hi - lo;
  if (range == 0.0) {
    out.cvar = out.evar = lo;
    out.cvar_alpha = lo;
    out.evar_alpha = 0.0;
    return out;
  }

  auto cvar_at = [&](double a) { return cvar_objective(losses, eta, a); };
  out.cvar_alpha = golden_section(cvar_at, lo, hi, 1e-10 * (1.0 + range));
  out.cvar = cvar_at(out.cvar_alpha);
  // The objective is piecewise linear with a minimizer at the VaR.
  if (const double at_var = cvar_at(out.var); at_var < out.cvar) {
    out.cvar = at_var;
    out.cvar_alpha = out.var;
  }

  auto evar_at_log = [&](double s) { return evar_objective(losses, eta, std::exp(s)); };
  const double s_star =
      golden_section(evar_at_log, std::log(range * 1e-8), std::log(range * 1e8), 1e-10);
  out.evar_alpha = std::exp(s_star);
  out.evar = evar_at_log(s_star);
  // The alpha -> 0 limit of the EVaR objective is the largest loss.
  if (hi < out.evar) {
    out.evar = hi;
    out.evar_alpha = 0.0;
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double black_scholes_call(double forward, double strike, double sigma) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "black_scholes: need forward, strike > 0 and sigma >= 0");
  }
  if (sigma == 0.0) return std::max(forward - strike, 0.0);
  const double d1 = (std::log(forward / strike) + 0.5 * sigma * sigma) / sigma;
  const double d2 = d1 - sigma;
  return forward * normal_cdf(d1) - strike * normal_cdf(d2);
}

double black_scholes_put(double forward, double strike, double sigma) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "black_scholes: need forward, strike > 0 and sigma >= 0");
  }
  if (sigma == 0.0) return std::max(strike - forward, 0.0);
  const double d1 = (std::log(forward / strike) + 0.5 * sigma * sigma) / sigma;
  const double d2 = d1 - sigma;
  return strike * normal_cdf(-d2) - forward * normal_cdf(-d1);
}

}  // namespace osmm
