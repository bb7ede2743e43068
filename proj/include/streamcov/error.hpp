#pragma once

#include <stdexcept>
#include <string>

namespace streamcov {

enum class Errc {
  // network structure
  Disconnected,
  SelfEdge,
  MultiEdge,
  NonpositiveLength,
  NotATree,
  BadOutlet,
  InvalidNetwork,
  InvalidPoint,
  SingularLaplacian,
  NotDirected,
  FlowUnconnectedPair,
  // scalar functions and covariance models
  OutOfDomainParam,
  InvalidParams,
  DeltaTooSmallForTree,
  HypothesisViolation,
  QuadratureFailure,
  Divergent,
  // inference
  NotPositiveDefinite,
  DimensionMismatch,
  RankDeficientDesign,
  NonConvergence,
  NonpositiveSd,
  DuplicateRecord,
  // parsing / io
  UnknownVariant,
  UnknownParam,
  ConstraintViolation,
  IoError,
};

const char* errc_name(Errc c);

/// Library-wide exception: a machine-checkable code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace streamcov
