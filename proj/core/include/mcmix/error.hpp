#pragma once

#include <stdexcept>
#include <string>

namespace mcmix {

enum class ErrorKind {
  InvalidArgument,
  IndexOutOfRange,
  ShapeMismatch,
  NonStochasticRow,
  CannotDetermineRank,
  NoCompanion,
  StartingRatioDegeneracy,
  NonRealSpectrum,
  ScalingUnderdetermined,
  VanishingScale,
  ComponentsNotCovered,
  RowSupportMismatch,
  InfeasibleLabeling,
  EmptySpectrum,
  GenerationFailed,
  Parse,
  NoTrails,
  Io,
};

// All library failures are reported through this type. what() carries a
// short human-readable message; kind() is stable for callers that branch.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcmix
