#include "sstlab/error.hpp"

namespace sstlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonSummableTail: return "NonSummableTail";
    case ErrorCode::kWindowExceeded: return "WindowExceeded";
    case ErrorCode::kInconsistentReversibility: return "InconsistentReversibility";
    case ErrorCode::kEmptyCenter: return "EmptyCenter";
    case ErrorCode::kNotLocallyFinite: return "NotLocallyFinite";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kBadRowSums: return "BadRowSums";
    case ErrorCode::kOffSupport: return "OffSupport";
    case ErrorCode::kEmptyIntersection: return "EmptyIntersection";
    case ErrorCode::kInconsistentInput: return "InconsistentInput";
    case ErrorCode::kAbsorbedState: return "AbsorbedState";
    case ErrorCode::kWindowTooSmall: return "WindowTooSmall";
    case ErrorCode::kNotLambdaCompatible: return "NotLambdaCompatible";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace sstlab
