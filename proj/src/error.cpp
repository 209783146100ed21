#include "polychain/error.hpp"

namespace polychain {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveHopping: return "NonPositiveHopping";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::EmptyPolymer: return "EmptyPolymer";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::InsufficientConfiguration: return "InsufficientConfiguration";
    case ErrorCode::InsufficientWindow: return "InsufficientWindow";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::OrderUndetermined: return "OrderUndetermined";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorCode::AnomalousAngles: return "AnomalousAngles";
    case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorCode::SmallDetuningGuard: return "SmallDetuningGuard";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorCode::FrontEscape: return "FrontEscape";
    case ErrorCode::InsufficientRange: return "InsufficientRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace polychain
