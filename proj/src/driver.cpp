#include "hesim/driver.hpp"

#include <cmath>

#include <json.hpp>

#include "hesim/error.hpp"
#include "hesim/kernels.hpp"
#include "hesim/rcce.hpp"
#include "model.hpp"

namespace hesim {

using nlohmann::json;

namespace {

const char* mode_name(Mode m) { return m == Mode::Full ? "full" : "reduced"; }

json header_for(const Scenario& s, const std::vector<std::string>& labels) {
  const IntegratorConfig& c = s.integrator;
  return {
      {"scenario_hash", scenario_hash(s)},
      {"kind", std::string(to_string(s.kind))},
      {"mode", mode_name(s.mode)},
      {"method", c.method == Method::Rk4Fixed ? "rk4" : "rk45"},
      {"rel_tol", c.rel_tol},
      {"abs_tol", c.abs_tol},
      {"t_end", c.t_end},
      {"sample_every", c.sample_every},
      {"direction", c.direction == Direction::Backward ? "backward" : "forward"},
      {"kB", s.kB},
      {"labels", labels},
      {"kernels", std::string(kernels::backend_name(kernels::active_backend()))},
  };
}

json stats_json(const OdeStats& st) {
  return {{"accepted", st.accepted}, {"rejected", st.rejected}, {"rhs_calls", st.rhs_calls}};
}

struct Gibbs {
  double beta = 0.0;
  double alpha = 0.0;
  std::vector<double> p;
};

// Canonical state of one subsystem at β, carrying total probability `norm`.
Gibbs gibbs_at(const Subsystem& sub, double beta, double norm) {
  const auto& part = sub.system.partition;
  std::vector<double> lnZ(part.sector_count());
  double shift = -INFINITY;
  for (std::size_t k = 0; k < lnZ.size(); ++k) {
    lnZ[k] = log_partition_function(sector_levels(sub.system.spectrum, part, k), beta);
    shift = std::max(shift, lnZ[k]);
  }
  double z = 0.0;
  for (double x : lnZ) z += std::exp(x - shift);
  Gibbs g;
  g.beta = beta;
  g.alpha = shift + std::log(z) - std::log(norm);
  for (double x : lnZ) g.p.push_back(std::exp(x - g.alpha));
  return g;
}

bool coupled(ScenarioKind k) {
  return k == ScenarioKind::NhGeneral || k == ScenarioKind::NhTwo || k == ScenarioKind::NhThree;
}

// β^SE per subsystem: its own for isolated and independent kinds, shared otherwise.
std::vector<Gibbs> equilibria(const detail::Model& model) {
  std::vector<Gibbs> out;
  if (coupled(model.kind)) {
    const double beta = detail::common_canonical_beta(model.subsystems, model.energy());
    for (const auto& s : model.subsystems) out.push_back(gibbs_at(s, beta, detail::normalization(s)));
    return out;
  }
  for (const auto& s : model.subsystems) {
    const double norm = detail::normalization(s);
    const EquilibriumState eq =
        equilibrium_state(s.system.spectrum, s.system.partition, s.energy() / norm);
    out.push_back(gibbs_at(s, eq.beta, norm));
  }
  return out;
}

json subsystem_json(const std::string& label, const HEState& h, const std::vector<double>& p,
                    const std::vector<double>& E, const std::vector<double>& S, double energy,
                    double entropy) {
  return {{"label", label}, {"alpha_K", h.alpha}, {"beta_K", h.beta}, {"p_K", p},
          {"E_K", E},       {"S_K", S},           {"energy", energy}, {"entropy", entropy}};
}

}  // namespace

Scenario apply_overrides(Scenario s, const RunOverrides& o) {
  if (o.mode) s.mode = *o.mode;
  if (o.t_end) s.integrator.t_end = *o.t_end;
  if (o.rel_tol) s.integrator.rel_tol = *o.rel_tol;
  if (o.abs_tol) s.integrator.abs_tol = *o.abs_tol;
  if (o.sample_every) s.integrator.sample_every = *o.sample_every;
  if (o.backward) s.integrator.direction = Direction::Backward;
  validate(s);
  return s;
}

RunResult run(const Scenario& scenario) {
  const detail::Model model = detail::build_model(scenario);
  RunResult result;
  json summary;
  summary["scenario_hash"] = scenario_hash(scenario);
  summary["kind"] = std::string(to_string(scenario.kind));
  summary["mode"] = mode_name(scenario.mode);

  const std::vector<Gibbs> eq = equilibria(model);
  json subs = json::array();
  if (scenario.kind == ScenarioKind::Isolated) {
    const Subsystem& s = model.subsystems.front();
    const Trajectory traj = integrate(s.state, s.system, scenario.integrator, scenario.mode);
    result.table = tabulate(traj, s.label);
    const Sample& last = traj.back();
    summary["t"] = last.t;
    summary["stats"] = stats_json(traj.stats);
    subs.push_back(subsystem_json(s.label, last.state, last.p_K, last.E_K, last.S_K, last.energy,
                                  last.entropy));
    summary["energy"] = last.energy;
    summary["entropy"] = last.entropy;
    summary["beta"] = last.potentials.beta;
    summary["entropy_production"] = last.entropy_production;
    double worst = 0.0;
    for (const Sample& x : traj.samples) worst = std::max(worst, x.fit_residual);
    summary["max_fit_residual"] = worst;
  } else {
    const CompositeTrajectory traj = detail::simulate(model, scenario.integrator);
    result.table = tabulate(traj);
    const CompositeSample& last = traj.samples.back();
    summary["t"] = last.t;
    summary["stats"] = stats_json(traj.stats);
    for (std::size_t j = 0; j < last.states.size(); ++j) {
      const SubsystemObservables& o = last.subsystems[j];
      subs.push_back(subsystem_json(traj.labels[j], last.states[j], o.p_K, o.E_K, o.S_K, o.energy,
                                    o.entropy));
    }
    summary["energy"] = last.energy;
    summary["entropy"] = last.entropy;
    summary["entropy_production"] = last.entropy_production;
    if (last.beta) summary["beta"] = *last.beta;
    if (last.three) {
      summary["beta_eff"] = last.three->beta_eff;
      summary["beta_ss"] = steady_state_beta(last.three->v_A, last.three->v_B, last.three->v_J,
                                             last.states[0].beta[0], last.states[2].beta[0]);
    }
    if (traj.steady_state_time) summary["steady_state_time"] = *traj.steady_state_time;
  }
  for (std::size_t j = 0; j < subs.size(); ++j) subs[j]["beta_SE"] = eq[j].beta;
  summary["subsystems"] = std::move(subs);
  if (scenario.kind != ScenarioKind::CompositeIndependent) summary["beta_SE"] = eq.front().beta;

  result.table.header = header_for(scenario, model.labels()).dump();
  result.summary = summary.dump(2) + "\n";
  return result;
}

std::string equilibrium_report(const Scenario& scenario) {
  const detail::Model model = detail::build_model(scenario);
  const std::vector<Gibbs> eq = equilibria(model);
  json out;
  out["kind"] = std::string(to_string(scenario.kind));
  json subs = json::array();
  for (std::size_t j = 0; j < eq.size(); ++j) {
    const Subsystem& s = model.subsystems[j];
    subs.push_back({{"label", s.label},
                    {"energy", s.energy()},
                    {"normalization", detail::normalization(s)},
                    {"beta_SE", eq[j].beta},
                    {"alpha_SE", eq[j].alpha},
                    {"p_K", eq[j].p}});
  }
  out["subsystems"] = std::move(subs);
  if (scenario.kind != ScenarioKind::CompositeIndependent) out["beta_SE"] = eq.front().beta;
  return out.dump(2) + "\n";
}

std::string steady_state_report(const Scenario& scenario) {
  if (scenario.kind != ScenarioKind::NhThree) {
    throw Error(ErrorCode::ValidationError, "steady-state needs an nh_three scenario");
  }
  const ThreeSystemModel model = three_system_model(scenario);
  const ThreeSystemPotentials p = three_system_potentials(model);
  const double bA = model.A.state.beta[0];
  const double bB = model.B.state.beta[0];
  json out = {
      {"v_A", p.v_A},         {"v_B", p.v_B},       {"v_J", p.v_J},
      {"omega_A", p.omega_A}, {"omega_B", p.omega_B}, {"beta_A", bA},
      {"beta_B", bB},         {"beta_eff", p.beta_eff},
      {"beta_ss", steady_state_beta(p.v_A, p.v_B, p.v_J, bA, bB)},
  };
  return out.dump(2) + "\n";
}

std::string project_report(const PopulationsDocument& doc) {
  const Spectrum spectrum = populations_spectrum(doc);
  const SectorPartition partition = populations_partition(doc, spectrum);
  FullState fs{doc.populations, doc.kB};
  const SectorAggregates agg = sector_aggregates(fs, spectrum, partition);
  const HEState h = rcce_project(agg, spectrum, partition);
  const FullState projected = to_full_populations(h, spectrum, partition);
  const SectorAggregates after = sector_aggregates(projected, spectrum, partition);
  json out = {
      {"alpha", h.alpha},
      {"beta", h.beta},
      {"p_K", agg.p},
      {"E_K", agg.E},
      {"S_K_before", agg.S},
      {"S_K_after", after.S},
      {"entropy_before", entropy(fs, spectrum)},
      {"entropy_after", entropy(projected, spectrum)},
      {"populations", projected.p},
  };
  return out.dump(2) + "\n";
}

int exit_code_for(ErrorCode code) { return is_validation_error(code) ? 2 : 3; }

}  // namespace hesim
