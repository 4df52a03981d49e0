#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace subdeconv {

enum class ErrorCode {
  EmptyPartition,
  NonPositiveDimension,
  NotOrthonormal,
  InvalidSamples,
  DimMismatch,
  ShapeMismatch,
  TooFewSamples,
  EmptyImage,
  UnknownShape,
  InvalidArgument,
  NotUndercomplete,
  RankDeficient,
  NotWhitened,
  DegenerateKernel,
  NonFiniteDeterminant,
  TooLarge,
  SingleBlock,
  DegenerateSamples,
  ParseError,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (tests, the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace subdeconv
