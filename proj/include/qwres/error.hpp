#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qwres {

enum class ErrorCode {
  // graph construction
  NotBalanced,
  DanglingArc,
  DuplicateTailIndex,
  DuplicateName,
  EmptyInterior,
  InvalidBoundary,
  ModelFormat,
  // expressions and coins
  SyntaxError,
  EvalError,
  NotUnitary,
  DimensionMismatch,
  // free routing at eps = 0
  NotDeterministic,
  NoExit,
  LabelMismatch,
  // spectral
  ClusterAmbiguity,
  IllConditionedChain,
  NotSimple,
  // scattering
  AtInteriorResonance,
  OrthogonalityViolated,
  SingularSystem,
  ZeroCluster,
  BadSupport,
  NotNormalized,
  BadChannelSplit,
  // asymptotics
  SimplicityViolated,
  TrackingAmbiguous,
  ResonanceOnCircle,
  NoCrossing,
  PeakTooLow,
  // line models and closed forms
  ZeroCorner,
  BadBarrierSpec,
  EpsOutOfRange,
  PoleHit,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotBalanced: return "NotBalanced";
    case ErrorCode::DanglingArc: return "DanglingArc";
    case ErrorCode::DuplicateTailIndex: return "DuplicateTailIndex";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::EmptyInterior: return "EmptyInterior";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::EvalError: return "EvalError";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotDeterministic: return "NotDeterministic";
    case ErrorCode::NoExit: return "NoExit";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::ClusterAmbiguity: return "ClusterAmbiguity";
    case ErrorCode::IllConditionedChain: return "IllConditionedChain";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::AtInteriorResonance: return "AtInteriorResonance";
    case ErrorCode::OrthogonalityViolated: return "OrthogonalityViolated";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ZeroCluster: return "ZeroCluster";
    case ErrorCode::BadSupport: return "BadSupport";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BadChannelSplit: return "BadChannelSplit";
    case ErrorCode::SimplicityViolated: return "SimplicityViolated";
    case ErrorCode::TrackingAmbiguous: return "TrackingAmbiguous";
    case ErrorCode::ResonanceOnCircle: return "ResonanceOnCircle";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::PeakTooLow: return "PeakTooLow";
    case ErrorCode::ZeroCorner: return "ZeroCorner";
    case ErrorCode::BadBarrierSpec: return "BadBarrierSpec";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace qwres
