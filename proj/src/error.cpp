#include "seqcd/error.hpp"

namespace seqcd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::EmptyPrefix: return "EmptyPrefix";
    case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::LambdaOutsideWindow: return "LambdaOutsideWindow";
    case ErrorCode::ZeroReferenceProb: return "ZeroReferenceProb";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InfeasibleKappa: return "InfeasibleKappa";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace seqcd
