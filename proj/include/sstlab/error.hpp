#pragma once

#include <stdexcept>
#include <string>

namespace sstlab {

enum class ErrorCode {
  kNonSummableTail,
  kWindowExceeded,
  kInconsistentReversibility,
  kEmptyCenter,
  kNotLocallyFinite,
  kInvalidModel,
  kNonSquare,
  kBadRowSums,
  kOffSupport,
  kEmptyIntersection,
  kInconsistentInput,
  kAbsorbedState,
  kWindowTooSmall,
  kNotLambdaCompatible,
  kConfig,
  kInvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Parse errors carry the 1-based line of the offending input (0 if unknown).
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(ErrorCode::kConfig,
              (line > 0 ? "line " + std::to_string(line) + ": " : "") + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace sstlab
