#pragma once

// Scenario documents: what to simulate, from which initial state, and how.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hesim/dynamics.hpp"
#include "hesim/nh_composite.hpp"
#include "hesim/ode.hpp"
#include "hesim/spectrum.hpp"

namespace hesim {

enum class ScenarioKind { Isolated, CompositeIndependent, NhGeneral, NhTwo, NhThree };

std::string_view to_string(ScenarioKind kind);

struct InitialCondition {
  /// Either (p, beta) or (alpha, beta) per sector; `alpha` empty means the former.
  std::vector<double> p;
  std::vector<double> alpha;
  std::vector<double> beta;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct SubsystemSpec {
  std::string label;
  std::vector<EnergyLevel> levels;
  /// Exactly one of cuts/assignment describes the partition.
  std::optional<std::vector<std::size_t>> cuts;
  std::optional<std::vector<int>> assignment;
  InitialCondition initial;
  std::vector<double> tau;

  friend bool operator==(const SubsystemSpec&, const SubsystemSpec&) = default;
};

struct Coupling {
  double tau_JA = 0.0;
  double tau_JB = 0.0;
  std::optional<double> omega_A;
  std::optional<double> omega_B;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Isolated;
  double kB = 1.0;
  std::vector<SubsystemSpec> subsystems;
  std::optional<Coupling> coupling;
  IntegratorConfig integrator;
  Mode mode = Mode::Reduced;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ParseError (naming the field) for malformed documents and
/// ValidationError for well-formed documents that describe an invalid model.
Scenario parse_scenario_text(std::string_view text);
Scenario parse_scenario(const std::string& path);

std::string serialize_scenario(const Scenario& scenario);

/// FNV-1a of the serialized document, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

/// Runtime objects built from the document.
Subsystem materialize(const SubsystemSpec& spec, double kB);
std::vector<Subsystem> materialize_all(const Scenario& scenario);
ThreeSystemModel three_system_model(const Scenario& scenario);

/// Throws ValidationError with the reason.
void validate(const Scenario& scenario);

/// Per-level populations to be projected onto the HE family.
struct PopulationsDocument {
  double kB = 1.0;
  std::vector<EnergyLevel> levels;
  std::optional<std::vector<std::size_t>> cuts;
  std::optional<std::vector<int>> assignment;
  std::vector<double> populations;
};

PopulationsDocument parse_populations_text(std::string_view text);
PopulationsDocument parse_populations(const std::string& path);

/// Throw ValidationError for duplicate energies, bad cuts and the like.
Spectrum populations_spectrum(const PopulationsDocument& doc);
SectorPartition populations_partition(const PopulationsDocument& doc, const Spectrum& spectrum);

}  // namespace hesim
