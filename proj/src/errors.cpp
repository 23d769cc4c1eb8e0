#include "renvnet/errors.hpp"

namespace renvnet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RowSumError: return "RowSumError";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::AllRejecting: return "AllRejecting";
    case ErrorCode::ZeroNormalizer: return "ZeroNormalizer";
    case ErrorCode::NotErgodic: return "NotErgodic";
    case ErrorCode::SingularTraffic: return "SingularTraffic";
    case ErrorCode::InvalidFrozenLaw: return "InvalidFrozenLaw";
    case ErrorCode::NotReversible: return "NotReversible";
    case ErrorCode::NotAGenerator: return "NotAGenerator";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ZeroAcceptance: return "ZeroAcceptance";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

}  // namespace renvnet
