#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hmlab {

enum class ErrorCode {
  InvalidArgument,
  DistanceZero,
  NoCorkscrew,
  ChainSearchFailed,
  EmptyBall,
  OutsideCover,
  UnderResolved,
  GammaOutsideBox,
  DegenerateGrid,
  DisconnectedGrid,
  NoConvergence,
  PoleUnresolved,
  NotFlat,
  PartitionMismatch,
  DegeneratePair,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, std::vector<double> history)
      : Error(ErrorCode::NoConvergence, what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

// Aggregates every violation found while validating an input, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace hmlab
