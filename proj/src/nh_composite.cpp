#include "hesim/nh_composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"

namespace hesim {

WeightedMoments Subsystem::moments() const {
  return weighted_moments(state, system.spectrum, system.partition, system.tau);
}

double Subsystem::tilde_tau() const { return moments().tilde_tau; }

double Subsystem::energy() const { return total_energy(state, system.spectrum, system.partition); }

double Subsystem::entropy() const {
  return overall_entropy(state, system.spectrum, system.partition);
}

double energy_rate(const Subsystem& sub, const SubsystemRates& rates) {
  detail::CompensatedSum acc;
  for (std::size_t k = 0; k < sub.system.sector_count(); ++k) {
    const SectorThermo t = sector_thermo(sub.state, sub.system.spectrum, sub.system.partition, k);
    acc += -t.E * rates.dalpha[k] - t.E2 * rates.dbeta[k];
  }
  return acc.value();
}

double entropy_rate(const Subsystem& sub, const SubsystemRates& rates) {
  const double kB = sub.state.kB;
  detail::CompensatedSum acc;
  for (std::size_t k = 0; k < sub.system.sector_count(); ++k) {
    const SectorThermo t = sector_thermo(sub.state, sub.system.spectrum, sub.system.partition, k);
    acc += kB * (t.p - t.S / kB) * rates.dalpha[k] + kB * (t.E - t.SH / kB) * rates.dbeta[k];
  }
  return acc.value();
}

namespace {

WeightedMoments nondegenerate_moments(const Subsystem& sub) {
  WeightedMoments m = sub.moments();
  if (is_degenerate(m)) {
    throw Error(ErrorCode::DegenerateVariance,
                "subsystem '" + sub.label + "' has a degenerate weighted energy variance");
  }
  return m;
}

void require_single_sector(const Subsystem& sub, const char* role) {
  if (sub.system.sector_count() != 1) {
    throw Error(ErrorCode::InvalidArgument, std::string(role) + " subsystem '" + sub.label +
                                                "' must have exactly one sector");
  }
}

double common_kB(std::span<const Subsystem> subs) {
  const double kB = subs.front().state.kB;
  for (const auto& s : subs) {
    if (s.state.kB != kB) throw Error(ErrorCode::InvalidArgument, "subsystems disagree on kB");
  }
  return kB;
}

SubsystemRates relax_towards(const Subsystem& sub, double alpha, double beta, double rate_scale) {
  SubsystemRates r;
  const std::size_t m = sub.system.sector_count();
  r.dalpha.resize(m);
  r.dbeta.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    r.dalpha[k] = rate_scale * (alpha - sub.state.alpha[k]) / sub.system.tau[k];
    r.dbeta[k] = rate_scale * (beta - sub.state.beta[k]) / sub.system.tau[k];
  }
  return r;
}

}  // namespace

NHPotentials nh_potentials(std::span<const Subsystem> subsystems) {
  if (subsystems.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "coupled composites need at least two subsystems");
  }
  const double kB = common_kB(subsystems);
  const std::size_t n = subsystems.size();
  std::vector<WeightedMoments> mom;
  mom.reserve(n);
  NHPotentials out;
  out.v.resize(n);
  out.beta_eff.resize(n);
  out.alpha.resize(n);
  detail::CompensatedSum num, den;
  for (std::size_t j = 0; j < n; ++j) {
    mom.push_back(nondegenerate_moments(subsystems[j]));
    out.v[j] = mom[j].var_H / mom[j].tilde_tau;
    out.beta_eff[j] = mom[j].cov_SH / (kB * mom[j].var_H);
    num += out.v[j] * out.beta_eff[j];
    den += out.v[j];
  }
  out.beta = num.value() / den.value();
  for (std::size_t j = 0; j < n; ++j) {
    out.alpha[j] = (mom[j].B_S - kB * out.beta * mom[j].B_H) / kB;
  }
  return out;
}

std::vector<SubsystemRates> nh_rhs(std::span<const Subsystem> subsystems) {
  const NHPotentials pots = nh_potentials(subsystems);
  std::vector<SubsystemRates> out;
  out.reserve(subsystems.size());
  for (std::size_t j = 0; j < subsystems.size(); ++j) {
    out.push_back(relax_towards(subsystems[j], pots.alpha[j], pots.beta, 1.0));
  }
  return out;
}

std::vector<SubsystemRates> independent_composite_step(std::span<const Subsystem> subsystems) {
  std::vector<SubsystemRates> out;
  out.reserve(subsystems.size());
  for (const auto& sub : subsystems) {
    ReducedRates r = reduced_rhs(sub.state, sub.system);
    out.push_back({std::move(r.dalpha), std::move(r.dbeta)});
  }
  return out;
}

double FlowReport::energy_flow(const std::string& from, const std::string& to) const {
  for (const auto& f : flows) {
    if (f.from == from && f.to == to) return f.energy;
    if (f.from == to && f.to == from) return -f.energy;
  }
  throw Error(ErrorCode::InvalidArgument, "no flow between '" + from + "' and '" + to + "'");
}

double FlowReport::entropy_flow(const std::string& from, const std::string& to) const {
  for (const auto& f : flows) {
    if (f.from == from && f.to == to) return f.entropy;
    if (f.from == to && f.to == from) return -f.entropy;
  }
  throw Error(ErrorCode::InvalidArgument, "no flow between '" + from + "' and '" + to + "'");
}

double FlowReport::irreversibility_of(const std::string& label) const {
  for (const auto& [name, value] : irreversibility) {
    if (name == label) return value;
  }
  throw Error(ErrorCode::InvalidArgument, "no subsystem '" + label + "' in report");
}

TwoSystemReport two_system_report(const TwoSystemModel& model) {
  require_single_sector(model.A, "two-system");
  require_single_sector(model.B, "two-system");
  const double kB = model.A.state.kB;
  if (model.B.state.kB != kB) throw Error(ErrorCode::InvalidArgument, "subsystems disagree on kB");
  const WeightedMoments mA = nondegenerate_moments(model.A);
  const WeightedMoments mB = nondegenerate_moments(model.B);
  const double bA = model.A.state.beta[0];
  const double bB = model.B.state.beta[0];

  TwoSystemReport out;
  out.v_A = mA.var_H / mA.tilde_tau;
  out.v_B = mB.var_H / mB.tilde_tau;
  const double vsum = out.v_A + out.v_B;
  out.beta = (out.v_A * bA + out.v_B * bB) / vsum;

  Flow f;
  f.from = model.A.label;
  f.to = model.B.label;
  f.energy = out.v_A * out.v_B * (bB - bA) / vsum;
  f.temperature = 1.0 / (kB * out.beta);
  f.entropy = f.energy / f.temperature;
  out.report.flows.push_back(f);
  out.report.irreversibility = {
      {model.A.label, kB * (bA - out.beta) * (bA - out.beta) * out.v_A},
      {model.B.label, kB * (bB - out.beta) * (bB - out.beta) * out.v_B},
  };
  out.report.total_entropy_production = kB * out.v_A * out.v_B * (bB - bA) * (bB - bA) / vsum;
  return out;
}

void validate(const ThreeSystemModel& model) {
  require_single_sector(model.A, "bath");
  require_single_sector(model.B, "bath");
  if (!(model.tau_JA > 0.0) || !(model.tau_JB > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "coupling times tau_JA and tau_JB must be positive");
  }
  for (const auto& w : {model.omega_A, model.omega_B}) {
    if (w && !(*w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "omega overrides must be >= 0");
  }
  if (model.A.state.kB != model.J.state.kB || model.B.state.kB != model.J.state.kB) {
    throw Error(ErrorCode::InvalidArgument, "subsystems disagree on kB");
  }
}

ThreeSystemPotentials three_system_potentials(const ThreeSystemModel& model) {
  validate(model);
  const double kB = model.J.state.kB;
  const WeightedMoments mA = nondegenerate_moments(model.A);
  const WeightedMoments mB = nondegenerate_moments(model.B);
  const WeightedMoments mJ = nondegenerate_moments(model.J);
  const double bA = model.A.state.beta[0];
  const double bB = model.B.state.beta[0];

  ThreeSystemPotentials p;
  p.omega_A = model.omega_A.value_or(mJ.tilde_tau / model.tau_JA);
  p.omega_B = model.omega_B.value_or(mJ.tilde_tau / model.tau_JB);
  p.v_A = mA.var_H / mA.tilde_tau;
  p.v_B = mB.var_H / mB.tilde_tau;
  p.v_J = mJ.var_H / mJ.tilde_tau;
  p.v_JA = p.omega_A * p.v_J;
  p.v_JB = p.omega_B * p.v_J;
  p.beta_eff = mJ.cov_SH / (kB * mJ.var_H);
  p.beta_JA = (p.v_A * bA + p.v_JA * p.beta_eff) / (p.v_A + p.v_JA);
  p.beta_JB = (p.v_B * bB + p.v_JB * p.beta_eff) / (p.v_B + p.v_JB);
  const double omega = p.omega_A + p.omega_B;
  p.beta_AB = omega > 0.0 ? (p.omega_A * p.beta_JA + p.omega_B * p.beta_JB) / omega : p.beta_eff;
  p.alpha_A = (mA.B_S - kB * p.beta_JA * mA.B_H) / kB;
  p.alpha_B = (mB.B_S - kB * p.beta_JB * mB.B_H) / kB;
  p.alpha_J = (mJ.B_S - kB * p.beta_AB * mJ.B_H) / kB;
  return p;
}

ThreeSystemRates three_system_rhs(const ThreeSystemModel& model) {
  const ThreeSystemPotentials p = three_system_potentials(model);
  ThreeSystemRates r;
  r.A = relax_towards(model.A, p.alpha_A, p.beta_JA, 1.0);
  r.B = relax_towards(model.B, p.alpha_B, p.beta_JB, 1.0);
  r.J = relax_towards(model.J, p.alpha_J, p.beta_AB, p.omega_A + p.omega_B);
  return r;
}

FlowReport three_system_flows(const ThreeSystemModel& model) {
  const ThreeSystemPotentials p = three_system_potentials(model);
  const double kB = model.J.state.kB;
  const double bA = model.A.state.beta[0];
  const double bB = model.B.state.beta[0];
  const WeightedMoments mJ = model.J.moments();

  FlowReport out;
  Flow aj;
  aj.from = model.A.label;
  aj.to = model.J.label;
  aj.energy = p.v_A * (p.beta_JA - bA);
  aj.temperature = 1.0 / (kB * p.beta_JA);
  aj.entropy = aj.energy / aj.temperature;
  Flow jb;
  jb.from = model.J.label;
  jb.to = model.B.label;
  jb.energy = p.v_B * (bB - p.beta_JB);
  jb.temperature = 1.0 / (kB * p.beta_JB);
  jb.entropy = jb.energy / jb.temperature;
  out.flows = {aj, jb};

  const double irr_A = kB * p.v_A * (bA - p.beta_JA) * (bA - p.beta_JA);
  const double irr_B = kB * p.v_B * (bB - p.beta_JB) * (bB - p.beta_JB);
  // Production inside J: the two conduction terms plus relaxation of J's
  // sector structure towards a single canonical distribution.
  const double internal = (p.omega_A + p.omega_B) / mJ.tilde_tau *
                          std::max(0.0, mJ.var_S - mJ.cov_SH * mJ.cov_SH / mJ.var_H) / kB;
  const double irr_J = kB * p.v_JA * (p.beta_eff - p.beta_JA) * (p.beta_eff - p.beta_JA) +
                       kB * p.v_JB * (p.beta_eff - p.beta_JB) * (p.beta_eff - p.beta_JB) + internal;
  out.irreversibility = {{model.A.label, irr_A}, {model.J.label, irr_J}, {model.B.label, irr_B}};
  out.total_entropy_production = irr_A + irr_J + irr_B;
  return out;
}

double steady_state_beta(double v_A, double v_B, double v_J, double beta_A, double beta_B) {
  if (!(v_A > 0.0) || !(v_B > 0.0) || !(v_J > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "steady_state_beta needs positive conductances");
  }
  const double wa = (v_B + v_J) * v_A;
  const double wb = (v_A + v_J) * v_B;
  return (wa * beta_A + wb * beta_B) / (wa + wb);
}

namespace {

std::vector<double> pack(std::span<const Subsystem> subs) {
  std::vector<double> y;
  for (const auto& s : subs) {
    y.insert(y.end(), s.state.alpha.begin(), s.state.alpha.end());
    y.insert(y.end(), s.state.beta.begin(), s.state.beta.end());
  }
  return y;
}

void unpack_into(std::span<const double> y, std::size_t& at, Subsystem& s) {
  const std::size_t m = s.system.sector_count();
  std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(at), m, s.state.alpha.begin());
  std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(at + m), m, s.state.beta.begin());
  at += 2 * m;
}

void unpack(std::span<const double> y, std::span<Subsystem> subs) {
  std::size_t at = 0;
  for (auto& s : subs) unpack_into(y, at, s);
}

void pack_rates(std::span<const SubsystemRates> rates, std::span<double> dy) {
  std::size_t at = 0;
  for (const auto& r : rates) {
    std::copy(r.dalpha.begin(), r.dalpha.end(), dy.begin() + static_cast<std::ptrdiff_t>(at));
    at += r.dalpha.size();
    std::copy(r.dbeta.begin(), r.dbeta.end(), dy.begin() + static_cast<std::ptrdiff_t>(at));
    at += r.dbeta.size();
  }
}

SubsystemObservables observe(const Subsystem& sub, double alpha, double beta) {
  SubsystemObservables o;
  detail::CompensatedSum e, s, p;
  for (const auto& t : all_sector_thermo(sub.state, sub.system.spectrum, sub.system.partition)) {
    o.p_K.push_back(t.p);
    o.E_K.push_back(t.E);
    o.S_K.push_back(t.S);
    e += t.E;
    s += t.S;
    p += t.p;
  }
  o.energy = e.value();
  o.entropy = s.value();
  o.normalization = p.value();
  o.alpha = alpha;
  o.beta = beta;
  return o;
}

void finish_totals(CompositeSample& c) {
  detail::CompensatedSum e, s;
  for (const auto& o : c.subsystems) {
    e += o.energy;
    s += o.entropy;
  }
  c.energy = e.value();
  c.entropy = s.value();
}

// Σ_J ⟨m_J²⟩_w / (kB τ̃_J) with m_J built from the coupled potentials.
double coupled_entropy_production(std::span<const Subsystem> subs, const NHPotentials& pots) {
  detail::CompensatedSum acc;
  for (std::size_t j = 0; j < subs.size(); ++j) {
    const WeightedMoments m = subs[j].moments();
    const MassieuEigenvalues eig =
        massieu_eigenvalues(m, subs[j].system.spectrum, {pots.alpha[j], pots.beta});
    acc += entropy_production(eig, m);
  }
  return acc.value();
}

double smallest_tau(std::span<const Subsystem> subs) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& s : subs) t = std::min(t, s.system.tau_min());
  return t;
}

}  // namespace

CompositeTrajectory integrate_composite(std::vector<Subsystem> subsystems, CompositeKind kind,
                                        const IntegratorConfig& config) {
  if (subsystems.empty()) throw Error(ErrorCode::InvalidArgument, "composite has no subsystems");
  if (kind == CompositeKind::NhThree) {
    throw Error(ErrorCode::InvalidArgument, "use integrate_three_system for three-system models");
  }
  if (kind == CompositeKind::NhTwo) {
    if (subsystems.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "two-system model needs exactly two subsystems");
    }
    require_single_sector(subsystems[0], "two-system");
    require_single_sector(subsystems[1], "two-system");
  }
  for (const auto& s : subsystems) check_shape(s.state, s.system.partition);

  CompositeTrajectory traj;
  traj.kind = kind;
  for (const auto& s : subsystems) traj.labels.push_back(s.label);
  const IntegratorConfig cfg = resolve_steps(config, smallest_tau(subsystems));

  std::vector<Subsystem> work = subsystems;
  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    unpack(y, work);
    const auto rates =
        kind == CompositeKind::Independent ? independent_composite_step(work) : nh_rhs(work);
    pack_rates(rates, dy);
  };
  auto observer = [&](double t, std::span<const double> y) {
    unpack(y, work);
    CompositeSample c;
    c.t = t;
    for (const auto& s : work) c.states.push_back(s.state);
    if (kind == CompositeKind::Independent) {
      detail::CompensatedSum prod;
      for (const auto& s : work) {
        const WeightedMoments m = s.moments();
        const SeaPotentials pots = solve_potentials(m);
        prod += entropy_production(massieu_eigenvalues(m, s.system.spectrum, pots), m);
        c.subsystems.push_back(observe(s, pots.alpha, pots.beta));
      }
      c.entropy_production = prod.value();
    } else {
      const NHPotentials pots = nh_potentials(work);
      for (std::size_t j = 0; j < work.size(); ++j) {
        c.subsystems.push_back(observe(work[j], pots.alpha[j], pots.beta));
      }
      c.beta = pots.beta;
      c.entropy_production = coupled_entropy_production(work, pots);
      if (kind == CompositeKind::NhTwo) c.flows = two_system_report({work[0], work[1]}).report;
    }
    finish_totals(c);
    traj.samples.push_back(std::move(c));
  };
  traj.stats = integrate_ode(rhs, pack(subsystems), 0.0, cfg, observer);
  return traj;
}

CompositeTrajectory integrate_three_system(ThreeSystemModel model,
                                           const IntegratorConfig& config) {
  validate(model);
  for (const Subsystem* s : {&model.A, &model.J, &model.B}) {
    check_shape(s->state, s->system.partition);
  }
  CompositeTrajectory traj;
  traj.kind = CompositeKind::NhThree;
  traj.labels = {model.A.label, model.J.label, model.B.label};

  // J's sectors relax (ω_A + ω_B) times faster than their own τ_K.
  const ThreeSystemPotentials p0 = three_system_potentials(model);
  const double omega = std::max(1.0, p0.omega_A + p0.omega_B);
  const double tau_min = std::min({model.A.system.tau_min(), model.B.system.tau_min(),
                                   model.J.system.tau_min() / omega});
  const IntegratorConfig cfg = resolve_steps(config, tau_min);

  ThreeSystemModel work = model;
  auto set_state = [&](std::span<const double> y) {
    std::size_t at = 0;
    unpack_into(y, at, work.A);
    unpack_into(y, at, work.J);
    unpack_into(y, at, work.B);
  };
  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    set_state(y);
    const ThreeSystemRates r = three_system_rhs(work);
    const SubsystemRates ordered[] = {r.A, r.J, r.B};
    pack_rates(ordered, dy);
  };

  int quiet_run = 0;
  double quiet_since = 0.0;
  auto observer = [&](double t, std::span<const double> y) {
    set_state(y);
    const ThreeSystemPotentials p = three_system_potentials(work);
    CompositeSample c;
    c.t = t;
    c.states = {work.A.state, work.J.state, work.B.state};
    c.subsystems = {observe(work.A, p.alpha_A, p.beta_JA), observe(work.J, p.alpha_J, p.beta_AB),
                    observe(work.B, p.alpha_B, p.beta_JB)};
    c.flows = three_system_flows(work);
    c.entropy_production = c.flows->total_entropy_production;
    c.three = p;
    finish_totals(c);

    const double dEJ = energy_rate(work.J, three_system_rhs(work).J);
    const double floor = std::max(cfg.abs_tol, cfg.rel_tol);
    if (std::fabs(dEJ) < floor * std::max(1.0, std::fabs(c.subsystems[1].energy))) {
      if (quiet_run == 0) quiet_since = t;
      if (++quiet_run >= 10 && !traj.steady_state_time) traj.steady_state_time = quiet_since;
    } else {
      quiet_run = 0;
    }
    traj.samples.push_back(std::move(c));
  };
  const Subsystem trio[] = {model.A, model.J, model.B};
  traj.stats = integrate_ode(rhs, pack(trio), 0.0, cfg, observer);
  return traj;
}

}  // namespace hesim
