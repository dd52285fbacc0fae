#pragma once

// Runtime form of a scenario, shared by the driver verbs.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hesim/nh_composite.hpp"
#include "hesim/scenario.hpp"

namespace hesim::detail {

struct Model {
  ScenarioKind kind = ScenarioKind::Isolated;
  std::vector<Subsystem> subsystems;  // A, J, B for nh_three
  std::optional<ThreeSystemModel> three;

  std::vector<std::string> labels() const;
  std::vector<HEState> states() const;
  void set_states(std::span<const HEState> states);
  double energy() const;
  double entropy() const;
};

Model build_model(const Scenario& scenario);

/// Isolated models run as a one-member independent composite.
CompositeTrajectory simulate(const Model& model, const IntegratorConfig& config);

/// States at the end of `config`'s interval.
std::vector<HEState> advance(const Model& model, const IntegratorConfig& config);

/// Common β at which every subsystem is canonical and the summed energies equal
/// `energy`; each subsystem keeps its own Σ p_K.
double common_canonical_beta(std::span<const Subsystem> subsystems, double energy);

double normalization(const Subsystem& sub);

}  // namespace hesim::detail
