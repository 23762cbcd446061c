#pragma once

#include "osmm/linalg.hpp"

namespace osmm {

struct EmpiricalRisks {
  double var = 0.0;
  double cvar = 0.0;
  double evar = 0.0;
  double cvar_alpha = 0.0;  // minimizing alpha of the CVaR objective
  double evar_alpha = 0.0;  // minimizing alpha of the EVaR objective (0 when the infimum is a limit)
};

/// alpha + mean((loss - alpha)_+) / (1 - eta).
double cvar_objective(const Vector& losses, double eta, double alpha);

/// alpha * log(mean(exp(loss / alpha)) / (1 - eta)) for alpha > 0, evaluated
/// with a max shift; +inf for alpha <= 0.
double evar_objective(const Vector& losses, double eta, double alpha);

/// VaR (inf-quantile of the empirical distribution), CVaR and EVaR of an
/// equally weighted sample. CVaR and EVaR come from golden-section searches
/// over alpha (on a log scale for EVaR) to a tolerance of 1e-10.
EmpiricalRisks empirical_risks(const Vector& losses, double eta);

/// Standard normal CDF.
double normal_cdf(double x);

/// Zero-discount Black-Scholes prices for a lognormal terminal value with
/// the given forward (mean), strike and total volatility. sigma = 0 returns
/// the intrinsic value.
double black_scholes_call(double forward, double strike, double sigma);
double black_scholes_put(double forward, double strike, double sigma);

}  // namespace osmm
