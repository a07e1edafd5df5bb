#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rslcr {

enum class ErrorCode {
  InvalidArgument,
  InvalidGeometry,
  IndexOutOfBounds,
  MissingPatch,
  DimensionMismatch,
  InsufficientCandidates,
  DegenerateData,
  SingularSystem,
  NonFiniteResult,
  KOutOfRange,
  IoFailure,
  CorruptFile,
  UnsupportedVersion,
  UnpairedFile,
};

/// Stable kebab-case identifier, used in CLI error lines.
std::string_view error_code_name(ErrorCode code);

/// True for errors caused by bad input or flags rather than by the runtime
/// environment; the CLI maps these to exit code 2.
bool is_precondition_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rslcr
