#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quadamp {

enum class ErrorKind {
  // numerical failures
  NearSingular,
  InterpolationIllConditioned,
  NoMinimum,
  NonPhysical,
  // physics-domain failures
  DegenerateLoop,
  PoleReached,
  AsymmetricConversion,
  OutOfRegime,
  IsolationNotReached,
  StabilityBoundViolated,
  TargetUnreachable,
  // configuration
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit status for an error category: 2 config, 3 physics, 4 numerical.
int exit_code_for(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace quadamp
