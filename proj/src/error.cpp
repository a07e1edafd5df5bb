#include "rslcr/error.hpp"

namespace rslcr {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidGeometry: return "invalid-geometry";
    case ErrorCode::IndexOutOfBounds: return "index-out-of-bounds";
    case ErrorCode::MissingPatch: return "missing-patch";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::InsufficientCandidates: return "insufficient-candidates";
    case ErrorCode::DegenerateData: return "degenerate-data";
    case ErrorCode::SingularSystem: return "singular-system";
    case ErrorCode::NonFiniteResult: return "non-finite-result";
    case ErrorCode::KOutOfRange: return "k-out-of-range";
    case ErrorCode::IoFailure: return "io-failure";
    case ErrorCode::CorruptFile: return "corrupt-file";
    case ErrorCode::UnsupportedVersion: return "unsupported-version";
    case ErrorCode::UnpairedFile: return "unpaired-file";
  }
  return "unknown";
}

bool is_precondition_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidGeometry:
    case ErrorCode::IndexOutOfBounds:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InsufficientCandidates:
    case ErrorCode::KOutOfRange:
    case ErrorCode::UnpairedFile:
      return true;
    default:
      return false;
  }
}

}  // namespace rslcr
