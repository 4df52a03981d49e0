#include "subdeconv/error.hpp"

namespace subdeconv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::NonPositiveDimension: return "NonPositiveDimension";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::InvalidSamples: return "InvalidSamples";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::UnknownShape: return "UnknownShape";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotUndercomplete: return "NotUndercomplete";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotWhitened: return "NotWhitened";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::NonFiniteDeterminant: return "NonFiniteDeterminant";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::SingleBlock: return "SingleBlock";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace subdeconv
