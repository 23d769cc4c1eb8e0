#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace renvnet {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  RowSumError,
  NotIrreducible,
  SingularSystem,
  AllRejecting,
  ZeroNormalizer,
  NotErgodic,
  SingularTraffic,
  InvalidFrozenLaw,
  NotReversible,
  NotAGenerator,
  HypothesisViolated,
  ZeroAcceptance,
  SchemaError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this one exception type;
// `code()` is what the CLI serializes into its error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace renvnet
