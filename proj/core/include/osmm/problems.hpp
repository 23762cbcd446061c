#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "osmm/oracle.hpp"
#include "osmm/rng.hpp"
#include "osmm/structured.hpp"

namespace osmm {

/// Named dense arrays; the sorted map keeps serialization order stable.
using ArrayMap = std::map<std::string, Matrix>;

/// A generated (or loaded) problem: data arrays from which the oracle is
/// rebuilt, the structured part g, a feasible start x0 and metadata.
///
/// Array names per kind (validation copies carry the prefix "val."):
///   kelly:      pi (N x 1), returns (N x n)
///   cvar:       returns (N x 3m); info: strike_call, strike_put, premium_call,
///               premium_put, forward, sigma (m x 1)
///   density:    features (N_grid x 14); info: data (m x 2), data_stats (14 x 1)
///   newsvendor: demand (N x n), price (N x n), a (n x 1), b (n x 1)
/// Any sample-based kind may add weights (N x 1) of importance weights.
struct ProblemInstance {
  std::string kind;
  std::map<std::string, double> params;
  ArrayMap arrays;
  StructuredFunction g;
  Vector x0;

  Eigen::Index dim() const { return x0.size(); }
  bool has_validation() const;

  /// Fresh oracle (with its own call counters) over the stored data; the
  /// validation twin is attached when validation arrays are present.
  Oracle make_oracle() const;

  double param(const std::string& key) const;
};

ProblemInstance gen_kelly(Eigen::Index n, Eigen::Index N, std::uint64_t seed,
                          bool with_validation = false);

ProblemInstance gen_cvar_portfolio(Eigen::Index m, Eigen::Index N, std::uint64_t seed,
                                   double eta = 0.8, double x_min = -0.1, double leverage = 1.6,
                                   bool with_validation = false);

enum class DensityRegularizer { L2, Gradient };

DensityRegularizer parse_density_regularizer(const std::string& name);

ProblemInstance gen_density(Eigen::Index N_grid, Eigen::Index m_data, std::uint64_t seed,
                            double lambda = 0.01,
                            DensityRegularizer regularizer = DensityRegularizer::L2,
                            double box = 30.0);

ProblemInstance gen_newsvendor(Eigen::Index n, Eigen::Index N, std::uint64_t seed,
                               double eta = 0.9, double phi_max = 1.0,
                               bool with_validation = false);

/// Random point in the interior of dom f (and of dom g where that makes
/// sense) for gradient checks.
Vector random_interior_point(const ProblemInstance& instance, Rng& rng);

/// Legendre polynomial P_d and its derivative, d in [0, 4].
double legendre(int degree, double x);
double legendre_derivative(int degree, double x);

/// Degree pairs (a, b), 1 <= a + b <= 4, ordered by total degree then by
/// decreasing a: the 14 density features P_a(z1) P_b(z2).
const std::vector<std::pair<int, int>>& legendre_terms();

/// Feature vector phi(z) and its Jacobian (14 x 2) at a point of [-1, 1]^2.
Vector legendre_features(double z1, double z2);
Matrix legendre_jacobian(double z1, double z2);

/// phi(q) = a^T q + 0.5 a^T (q - b)_+.
double production_cost(const Vector& a, const Vector& b, const Vector& q);

}  // namespace osmm
