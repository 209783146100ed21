#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polychain {

enum class ErrorCode {
  NonPositiveHopping,
  LengthMismatch,
  InvalidProbability,
  EmptyPolymer,
  EmptyWindow,
  InsufficientConfiguration,
  InsufficientWindow,
  NotCritical,
  OrderUndetermined,
  Degenerate,
  IndexOutOfRange,
  NotAnEigenvalue,
  AnomalousAngles,
  WindowTooNarrow,
  SmallDetuningGuard,
  SingularSystem,
  QuadratureUnderResolved,
  FrontEscape,
  InsufficientRange,
  ParseError,
  ValidationError,
  SchemaMismatch,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for errors caused by bad user input rather than numerics.
  bool is_validation() const noexcept {
    return code_ == ErrorCode::ParseError || code_ == ErrorCode::ValidationError ||
           code_ == ErrorCode::SchemaMismatch || code_ == ErrorCode::IoError;
  }

 private:
  ErrorCode code_;
};

}  // namespace polychain
