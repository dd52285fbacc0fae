#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "hesim/detail/compensated.hpp"
#include "hesim/driver.hpp"
#include "hesim/error.hpp"
#include "model.hpp"

namespace hesim {

using nlohmann::json;

namespace {

// Tolerances of the individual checks.
constexpr double kConstructionTol = 1e-9;
constexpr double kNormalizationDrift = 1e-10;
constexpr double kEnergyDrift = 1e-8;
constexpr double kMonotoneSlack = 1e-10;
constexpr double kProductionFloor = 1e-14;
constexpr double kFiniteDifference = 1e-5;
constexpr double kMassieu = 1e-12;
constexpr double kManifold = 1e-6;
constexpr double kEquivalenceP = 1e-6;
constexpr double kEquivalenceBeta = 1e-5;
constexpr double kDecomposition = 1e-12;
constexpr double kReversibility = 1e-6;
constexpr double kBalance = 1e-10;
constexpr double kIdentity = 1e-12;

class Checks {
 public:
  void add(std::string name, double value, double tolerance) {
    const bool pass = std::isfinite(value) && value <= tolerance;
    list_.push_back({std::move(name), value, tolerance, pass});
  }
  std::vector<Check> take() { return std::move(list_); }

 private:
  std::vector<Check> list_;
};

// What the checks read from a trajectory, whichever integrator produced it.
struct Series {
  std::vector<double> t;
  std::vector<double> energy;
  std::vector<double> entropy;
  std::vector<double> production;
  std::vector<std::vector<double>> norm;        // [sample][subsystem]
  std::vector<std::vector<double>> sub_energy;  // [sample][subsystem]
  std::vector<std::vector<HEState>> states;
};

double sum(std::span<const double> xs) {
  detail::CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

Series series_of(const Trajectory& traj) {
  Series s;
  for (const Sample& x : traj.samples) {
    s.t.push_back(x.t);
    s.energy.push_back(x.energy);
    s.entropy.push_back(x.entropy);
    s.production.push_back(x.entropy_production);
    s.norm.push_back({sum(x.p_K)});
    s.sub_energy.push_back({x.energy});
    s.states.push_back({x.state});
  }
  return s;
}

Series series_of(const CompositeTrajectory& traj) {
  Series s;
  for (const CompositeSample& c : traj.samples) {
    s.t.push_back(c.t);
    s.energy.push_back(c.energy);
    s.entropy.push_back(c.entropy);
    s.production.push_back(c.entropy_production);
    std::vector<double> n, e;
    for (const auto& o : c.subsystems) {
      n.push_back(o.normalization);
      e.push_back(o.energy);
    }
    s.norm.push_back(std::move(n));
    s.sub_energy.push_back(std::move(e));
    s.states.push_back(c.states);
  }
  return s;
}

bool coupled(ScenarioKind k) {
  return k == ScenarioKind::NhGeneral || k == ScenarioKind::NhTwo || k == ScenarioKind::NhThree;
}

void conservation_checks(Checks& checks, const Series& s, bool global_energy,
                         const std::string& suffix) {
  double drift_n = 0.0, drift_e = 0.0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    for (std::size_t j = 0; j < s.norm[i].size(); ++j) {
      drift_n = std::max(drift_n, std::fabs(s.norm[i][j] - s.norm[0][j]));
      if (!global_energy) {
        const double e0 = s.sub_energy[0][j];
        drift_e = std::max(drift_e, std::fabs(s.sub_energy[i][j] - e0) / std::max(1.0, std::fabs(e0)));
      }
    }
    if (global_energy) {
      drift_e = std::max(drift_e,
                         std::fabs(s.energy[i] - s.energy[0]) / std::max(1.0, std::fabs(s.energy[0])));
    }
  }
  checks.add("conservation.normalization" + suffix, drift_n, kNormalizationDrift);
  checks.add("conservation.energy" + suffix, drift_e, kEnergyDrift);

  double decrease = 0.0, negative = 0.0;
  for (std::size_t i = 0; i + 1 < s.t.size(); ++i) {
    const double dir = s.t[i + 1] > s.t[i] ? 1.0 : -1.0;
    decrease = std::max(decrease, -dir * (s.entropy[i + 1] - s.entropy[i]));
  }
  for (double p : s.production) negative = std::max(negative, -p);
  checks.add("second_law.entropy_monotone" + suffix, decrease, kMonotoneSlack);
  checks.add("second_law.entropy_production_nonnegative" + suffix, negative, kProductionFloor);
}

double tau_scale(const detail::Model& model) {
  double t = 0.0;
  for (const auto& s : model.subsystems) t = std::max(t, s.system.tau_max());
  return t;
}

// Centred differences of ⟨S⟩ around a handful of samples against dS/dt.
double finite_difference_error(detail::Model model, const Series& s, const IntegratorConfig& base) {
  const double peak = *std::max_element(s.production.begin(), s.production.end());
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.production[i] >= std::max(1e-3 * peak, 1e-10)) usable.push_back(i);
  }
  if (usable.empty()) return 0.0;
  const std::size_t picks = std::min<std::size_t>(6, usable.size());
  const double h = 1e-4 * tau_scale(model);

  IntegratorConfig cfg = base;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.t_end = h;
  cfg.sample_every = 0.0;
  cfg.renormalize = false;

  double worst = 0.0;
  for (std::size_t n = 0; n < picks; ++n) {
    const std::size_t i = usable[n * usable.size() / picks];
    model.set_states(s.states[i]);
    cfg.direction = Direction::Forward;
    detail::Model ahead = model;
    ahead.set_states(detail::advance(model, cfg));
    cfg.direction = Direction::Backward;
    detail::Model behind = model;
    behind.set_states(detail::advance(model, cfg));
    const double fd = (ahead.entropy() - behind.entropy()) / (2.0 * h);
    worst = std::max(worst, std::fabs(fd - s.production[i]) / s.production[i]);
  }
  return worst;
}

// Bath-coupled models lose about e^7 per unit time running backwards, so they
// get a shorter round trip.
double reversibility_error(detail::Model model, const IntegratorConfig& base) {
  IntegratorConfig cfg = base;
  cfg.t_end = std::min(model.kind == ScenarioKind::NhThree ? 1.0 : 5.0, base.t_end);
  cfg.sample_every = 0.0;
  cfg.rel_tol = std::min(base.rel_tol, 1e-11);
  cfg.abs_tol = std::min(base.abs_tol, 1e-13);
  const std::vector<HEState> start = model.states();
  cfg.direction = Direction::Forward;
  model.set_states(detail::advance(model, cfg));
  cfg.direction = Direction::Backward;
  const std::vector<HEState> back = detail::advance(model, cfg);
  double worst = 0.0;
  for (std::size_t j = 0; j < start.size(); ++j) {
    for (std::size_t k = 0; k < start[j].alpha.size(); ++k) {
      worst = std::max({worst, std::fabs(back[j].alpha[k] - start[j].alpha[k]),
                        std::fabs(back[j].beta[k] - start[j].beta[k])});
    }
  }
  return worst;
}

struct MassieuResiduals {
  double mean = 0.0;
  double energy = 0.0;
};

void massieu_residuals(MassieuResiduals& out, const FullState& fs, const System& system) {
  const WeightedMoments m = weighted_moments(fs, system.spectrum, system.partition, system.tau);
  const MassieuEigenvalues eig = massieu_eigenvalues(m, system.spectrum, solve_potentials(m));
  double eps = 1.0, big = 1.0;
  for (std::size_t i = 0; i < eig.m.size(); ++i) {
    if (fs.p[i] <= 0.0) continue;
    eps = std::max(eps, std::fabs(system.spectrum.energy(i)));
    big = std::max(big, std::fabs(eig.m[i]));
  }
  out.mean = std::max(out.mean, std::fabs(eig.mean));
  out.energy = std::max(out.energy, std::fabs(eig.energy) / (eps * big));
}

void isolated_checks(Checks& checks, const detail::Model& model, const Scenario& scenario,
                     const Trajectory& main) {
  const Subsystem& sub = model.subsystems.front();
  const System& sys = sub.system;

  const Trajectory reduced = main.mode == Mode::Reduced
                                 ? main
                                 : integrate(sub.state, sys, scenario.integrator, Mode::Reduced);
  const Trajectory full = main.mode == Mode::Full
                              ? main
                              : integrate(sub.state, sys, scenario.integrator, Mode::Full);
  conservation_checks(checks, series_of(main.mode == Mode::Full ? reduced : full), false,
                      main.mode == Mode::Full ? ".reduced" : ".full");

  MassieuResiduals mr;
  for (const Sample& x : reduced.samples) massieu_residuals(mr, x.populations, sys);
  checks.add("massieu.mean", mr.mean, kMassieu);
  checks.add("massieu.energy", mr.energy, kMassieu);

  double residual = 0.0;
  for (const Sample& x : full.samples) residual = std::max(residual, x.fit_residual);
  checks.add("manifold.affine_residual", residual, kManifold);

  double dp = 0.0, db = 0.0;
  const std::size_t n = std::min(reduced.samples.size(), full.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& r = reduced.samples[i];
    const Sample& f = full.samples[i];
    for (std::size_t k = 0; k < r.p_K.size(); ++k) {
      dp = std::max(dp, std::fabs(r.p_K[k] - f.p_K[k]));
      if (sys.partition.sector_size(k) >= 2) {
        db = std::max(db, std::fabs(r.state.beta[k] - f.state.beta[k]));
      }
    }
  }
  if (reduced.samples.size() != full.samples.size()) dp = db = INFINITY;
  checks.add("equivalence.p_K", dp, kEquivalenceP);
  checks.add("equivalence.beta_K", db, kEquivalenceBeta);

  const FullState fs0 = to_full_populations(sub.state, sys.spectrum, sys.partition);
  const BetaDecomposition d = beta_decomposition(fs0, sys.spectrum, sys.partition, sys.tau);
  checks.add("beta_decomposition.sum",
             std::fabs(d.fluctuation_term + d.covariance_term - d.beta), kDecomposition);
}

struct Rates {
  std::vector<double> dE;
  std::vector<double> dS;
};

Rates coupled_rates(const detail::Model& model) {
  Rates r;
  auto push = [&](const Subsystem& s, const SubsystemRates& x) {
    r.dE.push_back(energy_rate(s, x));
    r.dS.push_back(entropy_rate(s, x));
  };
  if (model.three) {
    const ThreeSystemRates t = three_system_rhs(*model.three);
    push(model.three->A, t.A);
    push(model.three->J, t.J);
    push(model.three->B, t.B);
  } else {
    const auto rates = nh_rhs(model.subsystems);
    for (std::size_t j = 0; j < rates.size(); ++j) push(model.subsystems[j], rates[j]);
  }
  return r;
}

void coupled_checks(Checks& checks, detail::Model model, const CompositeTrajectory& traj) {
  double energy_balance = 0.0, entropy_balance = 0.0, closure = 0.0;
  double irreversibility = 0.0, identity = 0.0, antisymmetry = 0.0;
  const std::vector<std::string> labels = model.labels();
  for (const CompositeSample& c : traj.samples) {
    model.set_states(c.states);
    const Rates r = coupled_rates(model);
    closure = std::max(closure, std::fabs(sum(r.dS) - c.entropy_production));
    if (!c.flows) {
      energy_balance = std::max(energy_balance, std::fabs(sum(r.dE)));
      continue;
    }
    const FlowReport& f = *c.flows;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      double e_in = 0.0, s_in = 0.0;
      for (const Flow& x : f.flows) {
        if (x.to == labels[j]) e_in += x.energy, s_in += x.entropy;
        if (x.from == labels[j]) e_in -= x.energy, s_in -= x.entropy;
      }
      const double irr = f.irreversibility_of(labels[j]);
      energy_balance = std::max(energy_balance, std::fabs(r.dE[j] - e_in));
      entropy_balance = std::max(entropy_balance, std::fabs(r.dS[j] - s_in - irr));
      irreversibility = std::max(irreversibility, -irr);
    }
    for (const Flow& x : f.flows) {
      identity = std::max(identity, std::fabs(x.entropy - x.energy / x.temperature) /
                                        std::max(std::fabs(x.entropy), 1e-300));
      antisymmetry = std::max(antisymmetry,
                              std::fabs(f.energy_flow(x.from, x.to) + f.energy_flow(x.to, x.from)));
    }
  }
  checks.add("balance.energy", energy_balance, kBalance);
  checks.add("balance.entropy_production", closure, kBalance);
  if (traj.samples.front().flows) {
    checks.add("balance.entropy", entropy_balance, kBalance);
    checks.add("flow.antisymmetry", antisymmetry, 0.0);
    checks.add("flow.temperature_identity", identity, kIdentity);
    checks.add("irreversibility.nonnegative", irreversibility, kProductionFloor);
  }
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<std::string> VerifyReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.pass) out.push_back(c.name);
  }
  return out;
}

std::string VerifyReport::to_json() const {
  json list = json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  json out = {{"scenario_hash", scenario_hash}, {"passed", passed()}, {"checks", std::move(list)}};
  return out.dump(2) + "\n";
}

VerifyReport verify(const Scenario& scenario, const VerifyOptions& options) {
  detail::Model model = detail::build_model(scenario);
  if (options.inject_normalization_error != 0.0) {
    std::vector<HEState> states = model.states();
    const double shift = std::log1p(options.inject_normalization_error);
    for (auto& h : states) {
      for (double& a : h.alpha) a -= shift;
    }
    model.set_states(states);
  }

  Checks checks;
  for (const auto& s : model.subsystems) {
    checks.add("construction.normalization." + s.label, std::fabs(detail::normalization(s) - 1.0),
               kConstructionTol);
  }

  const IntegratorConfig& cfg = scenario.integrator;
  Series main;
  if (scenario.kind == ScenarioKind::Isolated) {
    const Subsystem& s = model.subsystems.front();
    const Trajectory traj = integrate(s.state, s.system, cfg, scenario.mode);
    main = series_of(traj);
    conservation_checks(checks, main, false, "");
    isolated_checks(checks, model, scenario, traj);
  } else {
    const CompositeTrajectory traj = detail::simulate(model, cfg);
    main = series_of(traj);
    conservation_checks(checks, main, coupled(scenario.kind), "");
    if (coupled(scenario.kind)) {
      coupled_checks(checks, model, traj);
    } else {
      MassieuResiduals mr;
      for (const CompositeSample& c : traj.samples) {
        for (std::size_t j = 0; j < c.states.size(); ++j) {
          const System& sys = model.subsystems[j].system;
          massieu_residuals(mr, to_full_populations(c.states[j], sys.spectrum, sys.partition), sys);
        }
      }
      checks.add("massieu.mean", mr.mean, kMassieu);
      checks.add("massieu.energy", mr.energy, kMassieu);
    }
  }
  checks.add("second_law.entropy_production_fd", finite_difference_error(model, main, cfg),
             kFiniteDifference);
  checks.add("reversibility", reversibility_error(model, cfg), kReversibility);

  VerifyReport report;
  report.scenario_hash = scenario_hash(scenario);
  report.checks = checks.take();
  return report;
}

}  // namespace hesim
