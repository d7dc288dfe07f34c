#include "quadamp/error.hpp"

namespace quadamp {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::InterpolationIllConditioned: return "InterpolationIllConditioned";
    case ErrorKind::NoMinimum: return "NoMinimum";
    case ErrorKind::NonPhysical: return "NonPhysical";
    case ErrorKind::DegenerateLoop: return "DegenerateLoop";
    case ErrorKind::PoleReached: return "PoleReached";
    case ErrorKind::AsymmetricConversion: return "AsymmetricConversion";
    case ErrorKind::OutOfRegime: return "OutOfRegime";
    case ErrorKind::IsolationNotReached: return "IsolationNotReached";
    case ErrorKind::StabilityBoundViolated: return "StabilityBoundViolated";
    case ErrorKind::TargetUnreachable: return "TargetUnreachable";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
      return 2;
    case ErrorKind::DegenerateLoop:
    case ErrorKind::PoleReached:
    case ErrorKind::AsymmetricConversion:
    case ErrorKind::OutOfRegime:
    case ErrorKind::IsolationNotReached:
    case ErrorKind::StabilityBoundViolated:
    case ErrorKind::TargetUnreachable:
      return 3;
    case ErrorKind::NearSingular:
    case ErrorKind::InterpolationIllConditioned:
    case ErrorKind::NoMinimum:
    case ErrorKind::NonPhysical:
      return 4;
  }
  return 1;
}

}  // namespace quadamp
