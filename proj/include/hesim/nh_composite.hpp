#pragma once

// Composites of HE subsystems: independent relaxation, entropic coupling through
// one global β, and the bath-system-bath heat conduction model.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hesim/dynamics.hpp"
#include "hesim/he_state.hpp"
#include "hesim/ode.hpp"
#include "hesim/sea_potentials.hpp"

namespace hesim {

struct Subsystem {
  std::string label;
  System system;
  HEState state;

  WeightedMoments moments() const;
  double tilde_tau() const;
  double energy() const;
  double entropy() const;
};

struct SubsystemRates {
  std::vector<double> dalpha;
  std::vector<double> dbeta;
};

/// dE/dt and dS/dt of a subsystem from its potential rates, summed over sectors.
double energy_rate(const Subsystem& sub, const SubsystemRates& rates);
double entropy_rate(const Subsystem& sub, const SubsystemRates& rates);

struct NHPotentials {
  std::vector<double> alpha;     // α_J
  double beta = 0.0;             // global β
  std::vector<double> v;         // weighted energy variance / τ̃_J
  std::vector<double> beta_eff;  // within-subsystem entropy-energy slope
};

/// Throws InvalidArgument for fewer than two subsystems or mixed kB, and
/// DegenerateVariance when a subsystem has no weighted energy spread.
NHPotentials nh_potentials(std::span<const Subsystem> subsystems);

std::vector<SubsystemRates> nh_rhs(std::span<const Subsystem> subsystems);

/// Every subsystem relaxes on its own, with no coupling terms.
std::vector<SubsystemRates> independent_composite_step(std::span<const Subsystem> subsystems);

struct Flow {
  std::string from;
  std::string to;
  double energy = 0.0;       // Ė from → to
  double entropy = 0.0;      // Ṡ from → to
  double temperature = 0.0;  // T_Q = Ė / Ṡ
};

struct FlowReport {
  std::vector<Flow> flows;
  std::vector<std::pair<std::string, double>> irreversibility;  // Ṡ_irr per subsystem
  double total_entropy_production = 0.0;

  /// Ė from → to, with the sign flipped when only the reverse flow is stored.
  double energy_flow(const std::string& from, const std::string& to) const;
  double entropy_flow(const std::string& from, const std::string& to) const;
  double irreversibility_of(const std::string& label) const;
};

struct TwoSystemModel {
  Subsystem A;
  Subsystem B;
};

struct TwoSystemReport {
  double v_A = 0.0;
  double v_B = 0.0;
  double beta = 0.0;
  FlowReport report;
};

/// Both sides must have a single sector.
TwoSystemReport two_system_report(const TwoSystemModel& model);

struct ThreeSystemModel {
  Subsystem A;  // single-sector bath
  Subsystem J;  // multi-sector system in between
  Subsystem B;  // single-sector bath
  double tau_JA = 1.0;
  double tau_JB = 1.0;
  /// Constant coupling overrides; otherwise ω_X = τ̃_J / τ_JX at every call.
  std::optional<double> omega_A;
  std::optional<double> omega_B;
};

/// Throws InvalidArgument when a bath has more than one sector or a coupling
/// time is not positive.
void validate(const ThreeSystemModel& model);

struct ThreeSystemPotentials {
  double omega_A = 0.0;
  double omega_B = 0.0;
  double v_A = 0.0;
  double v_B = 0.0;
  double v_J = 0.0;
  double v_JA = 0.0;  // ω_A v_J, J's conductance towards A
  double v_JB = 0.0;
  double beta_eff = 0.0;  // of J
  double beta_JA = 0.0;
  double beta_JB = 0.0;
  double beta_AB = 0.0;
  double alpha_A = 0.0;
  double alpha_B = 0.0;
  double alpha_J = 0.0;
};

ThreeSystemPotentials three_system_potentials(const ThreeSystemModel& model);

struct ThreeSystemRates {
  SubsystemRates A;
  SubsystemRates J;
  SubsystemRates B;
};

ThreeSystemRates three_system_rhs(const ThreeSystemModel& model);

FlowReport three_system_flows(const ThreeSystemModel& model);

/// Steady-state β of the conducting system between two fixed baths.
double steady_state_beta(double v_A, double v_B, double v_J, double beta_A, double beta_B);

struct SubsystemObservables {
  std::vector<double> p_K;
  std::vector<double> E_K;
  std::vector<double> S_K;
  double energy = 0.0;
  double entropy = 0.0;
  double normalization = 0.0;  // Σ p_K
  double alpha = 0.0;          // potential this subsystem relaxes towards
  double beta = 0.0;
};

struct CompositeSample {
  double t = 0.0;
  std::vector<HEState> states;
  std::vector<SubsystemObservables> subsystems;
  double energy = 0.0;
  double entropy = 0.0;
  double entropy_production = 0.0;
  std::optional<double> beta;  // the shared β of the coupled models
  std::optional<FlowReport> flows;
  std::optional<ThreeSystemPotentials> three;
};

enum class CompositeKind { Independent, NhGeneral, NhTwo, NhThree };

struct CompositeTrajectory {
  CompositeKind kind = CompositeKind::Independent;
  std::vector<std::string> labels;
  std::vector<CompositeSample> samples;
  OdeStats stats;
  /// First sample time of a run of 10 consecutive samples with
  /// |dE_J/dt| < max(abs_tol, rel_tol) max(1, |E_J|) (three-system runs only).
  std::optional<double> steady_state_time;
};

/// Independent, general or two-system composites. Subsystem order is kept.
CompositeTrajectory integrate_composite(std::vector<Subsystem> subsystems, CompositeKind kind,
                                        const IntegratorConfig& config);

/// Samples are ordered A, J, B.
CompositeTrajectory integrate_three_system(ThreeSystemModel model, const IntegratorConfig& config);

}  // namespace hesim
