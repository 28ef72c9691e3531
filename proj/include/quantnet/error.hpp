#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quantnet {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidEdge,
  kDisconnectedGraph,
  kDimensionMismatch,
  kNotStronglyConvex,
  kNonpositiveInterval,
  kMalformedMessage,
  kInvalidStepSize,
  kNegativeEpsilon,
  kInadmissibleKappa,
  kDegenerateProblem,
  kNoFeasibleBits,
  kSeriesTooShort,
  kGenerationFailed,
  kMalformedTrace,
  kParseError,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; callers
// branch on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace quantnet
