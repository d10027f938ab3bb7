#pragma once

#include <stdexcept>
#include <string>

namespace nsed {

enum class ErrorCode {
  EmptyTeam,
  NonPositiveBudget,
  GammaOutOfRange,
  InvalidManifest,
  NegativeVote,
  OutOfRange,
  NonSquareMatrix,
  IndexOutOfRange,
  EmptyHistory,
  InvalidRound,
  InsufficientData,
  DegenerateVariance,
  InvalidTrajectory,
  Infeasible,
  CondorcetFail,
  SessionMismatch,
  PreconditionViolated,
  AgentFailure,
  Timeout,
  NoReserves,
  MalformedOutput,
  HttpError,
  UnknownAgent,
  IoError,
  ConfigError,
};

const char* to_string(ErrorCode code);

/// Every error raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nsed
