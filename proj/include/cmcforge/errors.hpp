// Error codes shared by all modules. Every throwing operation documents
// which codes it can raise; tests match on the code, not the message.
#pragma once

#include <stdexcept>
#include <string>

namespace cmcforge {

enum class Errc {
  GridTooSmall,
  LambdaZero,
  OnBranchCut,
  NotPeriodicOnGrid,
  NonConvergent,
  SymPointsEqual,
  SymPointsOffCircle,
  DegenerateMonodromy,
  InconsistentLambda,
  FitIllConditioned,
  ZeroHopf,
  NotJacobi,
  NotSkew,
  NoPeriod,
  OrderTooHigh,
  NotIntegrable,
  BadPotential,
  DegenerateCurve,
  NotBranchPoint,
  CurveTooDegenerate,
  LambdaEqualsAnchor,
  InsufficientSamples,
  PeriodsDegenerate,
  ConfigInvalid,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

  // Optional numeric payload, e.g. the true orbit period for
  // NotPeriodicOnGrid so callers can rebuild the grid.
  double payload = 0.0;

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what, double payload = 0.0) {
  Error e(code, what);
  e.payload = payload;
  throw e;
}

}  // namespace cmcforge
