#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace rpos {

enum class ErrorCode {
  NonPositiveEntry,
  OutOfDomain,
  ShiftBeyondDomain,
  DomainError,
  SingularContinuant,
  NoTailUndetermined,
  NonConvergence,
  NotInteriorScale,
  OmegaCollapse,
  DepthExceeded,
  GapRequired,
  LengthMismatch,
  NotPositiveRecurrent,
  EmptyEnsemble,
  IndexOutOfWindow,
  WindowTooLarge,
  RelationViolated,
  InvalidArgument,
  Validation,
};

const char* to_string(ErrorCode code);

// All library failures surface as rpos::Error. `index()` carries the
// offending position for the errors that have one (NonPositiveEntry,
// OmegaCollapse, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace rpos
