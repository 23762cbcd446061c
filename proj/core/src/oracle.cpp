#include "osmm/oracle.hpp"

#include <cmath>
#include <string>

namespace osmm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteOracle: return "NonFiniteOracle";
    case ErrorCode::StencilLeftDomain: return "StencilLeftDomain";
    case ErrorCode::EmptyBundle: return "EmptyBundle";
    case ErrorCode::InfeasibleBase: return "InfeasibleBase";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::SubproblemFailed: return "SubproblemFailed";
    case ErrorCode::DualSumMismatch: return "DualSumMismatch";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::LineSearchStalled: return "LineSearchStalled";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Oracle::Oracle(Eigen::Index dim, Callback eval, Callback validation)
    : dim_(dim), eval_(std::move(eval)), validation_(std::move(validation)) {
  if (!eval_) throw Error(ErrorCode::InvalidArgument, "oracle callback is empty");
}

OracleEval Oracle::checked_call(const Vector& x, bool need_gradient) const {
  if (x.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "oracle expects dim " + std::to_string(dim_) + ", got " + std::to_string(x.size()));
  }
  OracleEval out = eval_(x, need_gradient);
  if (std::isnan(out.value) || out.value == -kInf) {
    throw Error(ErrorCode::NonFiniteOracle, "oracle returned " + std::to_string(out.value));
  }
  if (!out.finite()) {
    out.gradient.reset();
    return out;
  }
  if (need_gradient) {
    if (!out.gradient || out.gradient->size() != dim_) {
      throw Error(ErrorCode::NonFiniteOracle, "oracle did not return a gradient of dim n");
    }
    if (!out.gradient->allFinite()) {
      throw Error(ErrorCode::NonFiniteOracle, "oracle gradient has non-finite entries");
    }
  }
  return out;
}

OracleEval Oracle::evaluate(const Vector& x) {
  ++gradient_calls_;
  return checked_call(x, true);
}

double Oracle::value(const Vector& x) {
  ++value_calls_;
  return checked_call(x, false).value;
}

double Oracle::validation_value(const Vector& x) const {
  if (!validation_) throw Error(ErrorCode::InvalidArgument, "oracle has no validation twin");
  const double v = validation_(x, false).value;
  if (std::isnan(v) || v == -kInf) {
    throw Error(ErrorCode::NonFiniteOracle, "validation oracle returned " + std::to_string(v));
  }
  return v;
}

GradientCheck gradient_check(Oracle& oracle, const Vector& x, double h) {
  const OracleEval base = oracle.evaluate(x);
  if (!base.finite()) {
    throw Error(ErrorCode::StencilLeftDomain, "gradient_check: base point outside domain");
  }
  const Vector& grad = *base.gradient;
  GradientCheck out;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = oracle.value(probe);
    probe(i) = x(i) - h;
    const double fm = oracle.value(probe);
    probe(i) = x(i);
    if (!(fp < kInf) || !(fm < kInf)) {
      throw Error(ErrorCode::StencilLeftDomain,
                  "gradient_check: stencil left domain at coordinate " + std::to_string(i));
    }
    const double fd = (fp - fm) / (2.0 * h);
    const double err = std::abs(fd - grad(i)) / (1.0 + std::abs(grad(i)));
    if (err > out.max_rel_error || out.worst_coordinate < 0) {
      out.max_rel_error = err;
      out.worst_coordinate = i;
    }
  }
  return out;
}

}  // namespace osmm
