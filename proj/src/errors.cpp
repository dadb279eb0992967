#include "udot/errors.hpp"

namespace udot {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InfeasibleMassBalance: return "InfeasibleMassBalance";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::ExitsDomain: return "ExitsDomain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace udot
