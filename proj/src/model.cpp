#include "model.hpp"

#include <cmath>

#include "canonical.hpp"
#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"

namespace hesim::detail {

std::vector<std::string> Model::labels() const {
  std::vector<std::string> out;
  for (const auto& s : subsystems) out.push_back(s.label);
  return out;
}

std::vector<HEState> Model::states() const {
  std::vector<HEState> out;
  for (const auto& s : subsystems) out.push_back(s.state);
  return out;
}

void Model::set_states(std::span<const HEState> states) {
  for (std::size_t j = 0; j < subsystems.size(); ++j) subsystems[j].state = states[j];
  if (three) {
    three->A.state = states[0];
    three->J.state = states[1];
    three->B.state = states[2];
  }
}

double Model::energy() const {
  CompensatedSum e;
  for (const auto& s : subsystems) e += s.energy();
  return e.value();
}

double Model::entropy() const {
  CompensatedSum e;
  for (const auto& s : subsystems) e += s.entropy();
  return e.value();
}

Model build_model(const Scenario& scenario) {
  Model m;
  m.kind = scenario.kind;
  if (scenario.kind == ScenarioKind::NhThree) {
    ThreeSystemModel t = three_system_model(scenario);
    m.subsystems = {t.A, t.J, t.B};
    m.three = std::move(t);
  } else {
    m.subsystems = materialize_all(scenario);
  }
  return m;
}

CompositeTrajectory simulate(const Model& model, const IntegratorConfig& config) {
  switch (model.kind) {
    case ScenarioKind::NhThree:
      return integrate_three_system(*model.three, config);
    case ScenarioKind::NhGeneral:
      return integrate_composite(model.subsystems, CompositeKind::NhGeneral, config);
    case ScenarioKind::NhTwo:
      return integrate_composite(model.subsystems, CompositeKind::NhTwo, config);
    case ScenarioKind::Isolated:
    case ScenarioKind::CompositeIndependent:
      break;
  }
  return integrate_composite(model.subsystems, CompositeKind::Independent, config);
}

std::vector<HEState> advance(const Model& model, const IntegratorConfig& config) {
  if (model.kind == ScenarioKind::Isolated) {
    const Subsystem& s = model.subsystems.front();
    IntegratorConfig c = config;
    c.sample_every = 0.0;
    return {integrate(s.state, s.system, c, Mode::Reduced).back().state};
  }
  IntegratorConfig c = config;
  c.sample_every = 0.0;
  return simulate(model, c).samples.back().states;
}

double normalization(const Subsystem& sub) {
  CompensatedSum n;
  for (double p : sector_probabilities(sub.state, sub.system.spectrum, sub.system.partition)) n += p;
  return n.value();
}

double common_canonical_beta(std::span<const Subsystem> subsystems, double energy) {
  std::vector<double> scratch;
  double lowest = 0.0, highest = 0.0;
  std::vector<double> weight;
  for (const auto& s : subsystems) {
    weight.push_back(normalization(s));
    lowest += weight.back() * s.system.spectrum.min_energy();
    highest += weight.back() * s.system.spectrum.max_energy();
  }
  if (!(energy > lowest && energy < highest)) {
    throw Error(ErrorCode::EnergyOutOfRange, "energy is not strictly inside the spectral range");
  }
  // f(β) = Σ N_J ⟨ε⟩_J(β) - E is strictly decreasing, f' = -Σ N_J var_J.
  auto eval = [&](double beta, double* slope) {
    CompensatedSum f, df;
    for (std::size_t j = 0; j < subsystems.size(); ++j) {
      const auto& sp = subsystems[j].system.spectrum;
      const CanonicalStats c = canonical_stats(sp.energies(), sp.degeneracies(), beta, scratch);
      f += weight[j] * c.mean;
      df += -weight[j] * c.variance;
    }
    if (slope) *slope = df.value();
    return f.value() - energy;
  };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 60 && eval(lo, nullptr) <= 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 60 && eval(hi, nullptr) >= 0.0; ++i) hi *= 2.0;
  double beta = 0.5 * (lo + hi);
  const double tol = 1e-12 * std::max(1.0, std::fabs(energy));
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double f = eval(beta, &slope);
    if (std::fabs(f) <= tol) return beta;
    (f > 0.0 ? lo : hi) = beta;
    double next = slope < 0.0 ? beta - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(beta))) return next;
    beta = next;
  }
  throw Error(ErrorCode::NoConvergence, "common equilibrium β did not converge");
}

}  // namespace hesim::detail
