#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace netrisk {

// Structural / value problems found while building a network. These are
// data errors: the CLI maps them to exit code 1 and a diagnostics file.
enum class DiagCode {
  DuplicateEdge,
  UnknownNodeReference,
  WeightSumExceedsOne,
  WeightSumBelowOne,  // warning unless strict stochasticity is requested
  RoleAlphaMismatch,
  InvalidProbability,
  InvalidWeight,
  NegativeAmount,
  MissingEdgeWeight,
  AmbiguousEdgeWeight,
  MalformedRecord,
};

enum class Severity { Warning, Error };

struct Diagnostic {
  DiagCode code;
  Severity severity;
  std::string subject;  // node id, or "obligee<-principal" for edges
  std::string message;
};

const char* to_string(DiagCode code);

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

// Runtime failures of analysis operations (not input-data problems).
enum class ErrorCode {
  SolverDidNotConverge,
  NotAnIntermediary,
  AssumptionViolated,
  NotADag,
  InstanceTooLarge,
  DimensionMismatch,
  NoConvergenceWithinTMax,
  StubMatchingFailed,
  NoSegmentInformation,
  InfeasibleSpec,
  RolePersistenceViolated,
  AlphaBoundViolated,
  InvalidArgument,
  IoFailure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void throw_error(ErrorCode code, const std::string& message);

}  // namespace netrisk
