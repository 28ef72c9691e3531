#include "quantnet/error.hpp"

namespace quantnet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidEdge: return "InvalidEdge";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotStronglyConvex: return "NotStronglyConvex";
    case ErrorCode::kNonpositiveInterval: return "NonpositiveInterval";
    case ErrorCode::kMalformedMessage: return "MalformedMessage";
    case ErrorCode::kInvalidStepSize: return "InvalidStepSize";
    case ErrorCode::kNegativeEpsilon: return "NegativeEpsilon";
    case ErrorCode::kInadmissibleKappa: return "InadmissibleKappa";
    case ErrorCode::kDegenerateProblem: return "DegenerateProblem";
    case ErrorCode::kNoFeasibleBits: return "NoFeasibleBits";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kMalformedTrace: return "MalformedTrace";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace quantnet
