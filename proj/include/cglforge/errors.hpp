#pragma once

#include <stdexcept>
#include <string>

namespace cglforge {

enum class ErrorCode {
  NonSimpleEigenvalue,
  NoConvergence,
  SingularMatrix,
  ReducedResolventSingular,
  CallbackFailure,
  MissingDerivativeCallback,
  NonlocalUnsupported,
  GridTooCoarse,
  NoSignChange,
  NonUniqueCritical,
  NotDiagonalizable,
  BoundViolated,
  NonQuadraticOrder,
  ZeroModeSingular,
  SecondHarmonicSingular,
  RouteMismatch,
  ResonantMode,
  CollapseToZero,
  TruncationInsufficient,
  FitIllConditioned,
  BlowUp,
  UnderResolved,
  UnknownFixture,
  InvalidArgument,
  ParseError,
  HypothesisFailure,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonSimpleEigenvalue: return "NonSimpleEigenvalue";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::ReducedResolventSingular: return "ReducedResolventSingular";
    case ErrorCode::CallbackFailure: return "CallbackFailure";
    case ErrorCode::MissingDerivativeCallback: return "MissingDerivativeCallback";
    case ErrorCode::NonlocalUnsupported: return "NonlocalUnsupported";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NonUniqueCritical: return "NonUniqueCritical";
    case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::NonQuadraticOrder: return "NonQuadraticOrder";
    case ErrorCode::ZeroModeSingular: return "ZeroModeSingular";
    case ErrorCode::SecondHarmonicSingular: return "SecondHarmonicSingular";
    case ErrorCode::RouteMismatch: return "RouteMismatch";
    case ErrorCode::ResonantMode: return "ResonantMode";
    case ErrorCode::CollapseToZero: return "CollapseToZero";
    case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorCode::FitIllConditioned: return "FitIllConditioned";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::UnderResolved: return "UnderResolved";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::HypothesisFailure: return "HypothesisFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}
  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace cglforge
