#include "hmlab/error.hpp"

namespace hmlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DistanceZero: return "DistanceZero";
    case ErrorCode::NoCorkscrew: return "NoCorkscrew";
    case ErrorCode::ChainSearchFailed: return "ChainSearchFailed";
    case ErrorCode::EmptyBall: return "EmptyBall";
    case ErrorCode::OutsideCover: return "OutsideCover";
    case ErrorCode::UnderResolved: return "UnderResolved";
    case ErrorCode::GammaOutsideBox: return "GammaOutsideBox";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::DisconnectedGrid: return "DisconnectedGrid";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PoleUnresolved: return "PoleUnresolved";
    case ErrorCode::NotFlat: return "NotFlat";
    case ErrorCode::PartitionMismatch: return "PartitionMismatch";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string s = std::to_string(problems.size()) + " problem(s)";
  for (const std::string& p : problems) s += "\n  - " + p;
  return s;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(ErrorCode::ValidationError, join_problems(problems)), problems_(std::move(problems)) {}

}  // namespace hmlab
