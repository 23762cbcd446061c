#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osmm {

enum class ErrorCode {
  SingularSystem,
  ZeroVector,
  DimensionMismatch,
  NonFiniteOracle,
  StencilLeftDomain,
  EmptyBundle,
  InfeasibleBase,
  NumericalBreakdown,
  SubproblemFailed,
  DualSumMismatch,
  InfeasibleStart,
  LineSearchStalled,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library exception. Every failure raised by osmm carries one of the codes
/// above so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace osmm
