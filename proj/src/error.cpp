#include "rpos/error.hpp"

namespace rpos {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ShiftBeyondDomain: return "ShiftBeyondDomain";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularContinuant: return "SingularContinuant";
    case ErrorCode::NoTailUndetermined: return "NoTailUndetermined";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NotInteriorScale: return "NotInteriorScale";
    case ErrorCode::OmegaCollapse: return "OmegaCollapse";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::GapRequired: return "GapRequired";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotPositiveRecurrent: return "NotPositiveRecurrent";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::IndexOutOfWindow: return "IndexOutOfWindow";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::RelationViolated: return "RelationViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Validation: return "Validation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      index_(index) {}

}  // namespace rpos
