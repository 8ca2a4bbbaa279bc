#include "reshare/error.hpp"

namespace reshare {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::InvalidCandidates: return "INVALID_CANDIDATES";
    case ErrorCode::InvalidAlpha: return "INVALID_ALPHA";
    case ErrorCode::InvalidParams: return "INVALID_PARAMS";
    case ErrorCode::TooSmall: return "TOO_SMALL";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::UnknownCascade: return "UNKNOWN_CASCADE";
    case ErrorCode::MismatchedCascade: return "MISMATCHED_CASCADE";
    case ErrorCode::MissingSetting: return "MISSING_SETTING";
    case ErrorCode::Io: return "IO";
    case ErrorCode::Parse: return "PARSE";
  }
  return "UNKNOWN";
}

}  // namespace reshare
