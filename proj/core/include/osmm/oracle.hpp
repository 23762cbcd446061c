#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

#include "osmm/linalg.hpp"

namespace osmm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Value of f at a point, plus its gradient when requested and the value is
/// finite. A value of +inf means the point lies outside dom f.
struct OracleEval {
  double value = kInf;
  std::optional<Vector> gradient;

  bool finite() const { return value < kInf; }

  static OracleEval outside() { return {}; }
};

/// Callback-backed oracle for the smooth part f. Counts value-only calls
/// (line search) separately from value+gradient calls.
class Oracle {
 public:
  using Callback = std::function<OracleEval(const Vector& x, bool need_gradient)>;

  Oracle(Eigen::Index dim, Callback eval, Callback validation = {});

  Eigen::Index dim() const { return dim_; }

  /// Value and gradient. Throws NonFiniteOracle on NaN / -inf output.
  OracleEval evaluate(const Vector& x);

  /// Value only.
  double value(const Vector& x);

  bool has_validation() const { return static_cast<bool>(validation_); }

  /// Value of the independent validation twin; not counted.
  double validation_value(const Vector& x) const;

  std::int64_t value_calls() const { return value_calls_; }
  std::int64_t gradient_calls() const { return gradient_calls_; }

 private:
  OracleEval checked_call(const Vector& x, bool need_gradient) const;

  Eigen::Index dim_;
  Callback eval_;
  Callback validation_;
  std::int64_t value_calls_ = 0;
  std::int64_t gradient_calls_ = 0;
};

struct GradientCheck {
  double max_rel_error = 0.0;
  Eigen::Index worst_coordinate = -1;
};

/// Central-difference check of the oracle gradient at x:
/// max_i |fd_i - g_i| / (1 + |g_i|). Throws StencilLeftDomain when any
/// stencil point evaluates to +inf.
GradientCheck gradient_check(Oracle& oracle, const Vector& x, double h = 1e-6);

}  // namespace osmm
