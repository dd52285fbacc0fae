#pragma once

// What the command-line verbs do, callable without a process boundary.

#include <optional>
#include <string>
#include <vector>

#include "hesim/error.hpp"
#include "hesim/scenario.hpp"
#include "hesim/trajectory_io.hpp"

namespace hesim {

struct RunOverrides {
  std::optional<Mode> mode;
  std::optional<double> t_end;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> sample_every;
  bool backward = false;
};

/// Applies the overrides and re-validates.
Scenario apply_overrides(Scenario scenario, const RunOverrides& overrides);

struct RunResult {
  TrajectoryTable table;  // header filled in
  std::string summary;    // JSON: final β_K, p_K, ⟨S⟩, ⟨H⟩ and β^SE where defined
};

RunResult run(const Scenario& scenario);

/// Gibbs state at the scenario's conserved energy. Coupled kinds share one β.
std::string equilibrium_report(const Scenario& scenario);

/// Algebraic steady-state β of J between the baths, from the initial state.
std::string steady_state_report(const Scenario& scenario);

/// RCCE projection of the populations, with sector aggregates before and after.
std::string project_report(const PopulationsDocument& doc);

struct Check {
  std::string name;
  double value = 0.0;  // measured violation, compared with value <= tolerance
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  /// Scales every initial sector probability by (1 + δ) after construction.
  double inject_normalization_error = 0.0;
};

struct VerifyReport {
  std::string scenario_hash;
  std::vector<Check> checks;

  bool passed() const;
  std::vector<std::string> failures() const;
  std::string to_json() const;
};

VerifyReport verify(const Scenario& scenario, const VerifyOptions& options = {});

/// 0 ok, 2 bad input, 3 numerical failure, 4 failed verification.
int exit_code_for(ErrorCode code);

}  // namespace hesim
