#pragma once

#include <stdexcept>
#include <string>

namespace hesim {

enum class ErrorCode {
  DuplicateEnergy,
  NonPositiveDegeneracy,
  EmptySpectrum,
  InvalidCut,
  EmptySector,
  LabelGap,
  ZeroSectorProbability,
  DegenerateSectorEnergies,
  EnergyOutOfRange,
  NoConvergence,
  ZeroPopulationTotal,
  DegenerateVariance,
  StepSizeUnderflow,
  InvalidArgument,
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorCode code);

/// True for codes that describe bad input rather than a numerical failure.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hesim
