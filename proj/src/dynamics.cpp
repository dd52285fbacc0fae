#include "hesim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "canonical.hpp"
#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"
#include "hesim/kernels.hpp"

namespace hesim {

System::System(Spectrum s, SectorPartition p, std::vector<double> t)
    : spectrum(std::move(s)), partition(std::move(p)), tau(std::move(t)) {
  if (partition.level_count() != spectrum.size()) {
    throw Error(ErrorCode::InvalidArgument, "partition does not cover the spectrum");
  }
  check_relaxation_times(tau, partition);
}

double System::tau_min() const { return *std::min_element(tau.begin(), tau.end()); }
double System::tau_max() const { return *std::max_element(tau.begin(), tau.end()); }

ReducedRates reduced_rhs(const HEState& state, const System& system, DegeneratePolicy policy) {
  check_shape(state, system.partition);
  const WeightedMoments m = weighted_moments(state, system.spectrum, system.partition, system.tau);
  ReducedRates r;
  r.potentials = solve_potentials(m, policy);
  const std::size_t k_count = system.sector_count();
  r.dalpha.resize(k_count);
  r.dbeta.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    r.dalpha[k] = (r.potentials.alpha - state.alpha[k]) / system.tau[k];
    r.dbeta[k] = (r.potentials.beta - state.beta[k]) / system.tau[k];
  }
  return r;
}

std::vector<double> full_rhs(const FullState& fs, const System& system, DegeneratePolicy policy) {
  const WeightedMoments m = weighted_moments(fs, system.spectrum, system.partition, system.tau);
  const SeaPotentials pots = solve_potentials(m, policy);
  const MassieuEigenvalues eig = massieu_eigenvalues(m, system.spectrum, pots);
  std::vector<double> dp(fs.p.size());
  for (std::size_t i = 0; i < dp.size(); ++i) {
    const double tau = system.tau[system.partition.sector_of(i)];
    dp[i] = fs.p[i] > 0.0 ? fs.p[i] * eig.m[i] / (fs.kB * tau) : 0.0;
  }
  return dp;
}

std::vector<SectorRate> sector_rates(const HEState& state, const System& system) {
  const ReducedRates r = reduced_rhs(state, system);
  const double kB = state.kB;
  std::vector<SectorRate> out(system.sector_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const SectorThermo t = sector_thermo(state, system.spectrum, system.partition, k);
    out[k].dE = -t.E * r.dalpha[k] - t.E2 * r.dbeta[k];
    out[k].dS = kB * (t.p - t.S / kB) * r.dalpha[k] + kB * (t.E - t.SH / kB) * r.dbeta[k];
  }
  return out;
}

HEState EquilibriumState::as_he_state(double kB) const {
  HEState h;
  h.kB = kB;
  h.alpha.assign(p.size(), alpha);
  h.beta.assign(p.size(), beta);
  return h;
}

EquilibriumState equilibrium_state(const Spectrum& spectrum, const SectorPartition& partition,
                                   double E0) {
  const auto eps = spectrum.energies();
  const auto g = spectrum.degeneracies();
  EquilibriumState out;
  out.beta = detail::solve_canonical_beta(eps, g, E0);
  std::vector<double> lnZ(partition.sector_count());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lnZ.size(); ++k) {
    lnZ[k] = log_partition_function(sector_levels(spectrum, partition, k), out.beta);
    shift = std::max(shift, lnZ[k]);
  }
  detail::CompensatedSum z;
  for (double x : lnZ) z += std::exp(x - shift);
  out.alpha = shift + std::log(z.value());
  out.p.resize(lnZ.size());
  for (std::size_t k = 0; k < lnZ.size(); ++k) out.p[k] = std::exp(lnZ[k] - out.alpha);
  return out;
}

Sample make_sample(double t, const FullState& populations, const System& system,
                   const HEState* he, DegeneratePolicy policy) {
  Sample s;
  s.t = t;
  s.populations = populations;
  const SectorAggregates agg = sector_aggregates(populations, system.spectrum, system.partition);
  s.p_K = agg.p;
  s.E_K = agg.E;
  s.S_K = agg.S;
  detail::CompensatedSum e, en;
  for (std::size_t k = 0; k < agg.p.size(); ++k) {
    e += agg.E[k];
    en += agg.S[k];
  }
  s.energy = e.value();
  s.entropy = en.value();

  const AffineFit fit = affine_fit(populations, system.spectrum, system.partition,
                                   he != nullptr ? std::span<const double>(he->beta)
                                                 : std::span<const double>());
  s.fit_residual = fit.max_residual;
  if (he != nullptr) {
    s.state = *he;
  } else {
    s.state.kB = populations.kB;
    s.state.alpha = fit.alpha;
    s.state.beta = fit.beta;
  }

  const WeightedMoments m =
      weighted_moments(populations, system.spectrum, system.partition, system.tau);
  s.potentials = solve_potentials(m, policy);
  const MassieuEigenvalues eig = massieu_eigenvalues(m, system.spectrum, s.potentials);
  s.entropy_production = entropy_production(eig, m);
  return s;
}

namespace {

HEState unpack(std::span<const double> y, double kB) {
  const std::size_t m = y.size() / 2;
  HEState h;
  h.kB = kB;
  h.alpha.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m));
  h.beta.assign(y.begin() + static_cast<std::ptrdiff_t>(m), y.end());
  return h;
}

Trajectory integrate_populations(const FullState& initial, const System& system,
                                 const IntegratorConfig& config) {
  const IntegratorConfig cfg = resolve_steps(config, system.tau_min());
  Trajectory traj;
  traj.mode = Mode::Full;
  const double kB = initial.kB;
  FullState work;
  work.kB = kB;
  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    work.p.assign(y.begin(), y.end());
    const auto dp = full_rhs(work, system);
    std::copy(dp.begin(), dp.end(), dy.begin());
  };
  auto observer = [&](double t, std::span<const double> y) {
    FullState fs;
    fs.kB = kB;
    fs.p.assign(y.begin(), y.end());
    traj.samples.push_back(make_sample(t, fs, system));
  };
  OdePostStep post;
  if (cfg.renormalize) {
    post = [&](std::span<double> y) {
      const double total = kernels::dot(y, system.spectrum.degeneracies());
      for (double& x : y) x /= total;
    };
  }
  traj.stats = integrate_ode(rhs, initial.p, 0.0, cfg, observer, post);
  return traj;
}

}  // namespace

Trajectory integrate(const HEState& initial, const System& system, const IntegratorConfig& config,
                     Mode mode) {
  check_shape(initial, system.partition);
  if (mode == Mode::Full) {
    return integrate_populations(to_full_populations(initial, system.spectrum, system.partition),
                                 system, config);
  }
  const IntegratorConfig cfg = resolve_steps(config, system.tau_min());
  Trajectory traj;
  traj.mode = Mode::Reduced;
  const double kB = initial.kB;
  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const ReducedRates r = reduced_rhs(unpack(y, kB), system);
    std::copy(r.dalpha.begin(), r.dalpha.end(), dy.begin());
    std::copy(r.dbeta.begin(), r.dbeta.end(), dy.begin() + static_cast<std::ptrdiff_t>(r.dalpha.size()));
  };
  auto observer = [&](double t, std::span<const double> y) {
    const HEState h = unpack(y, kB);
    traj.samples.push_back(
        make_sample(t, to_full_populations(h, system.spectrum, system.partition), system, &h));
  };
  OdePostStep post;
  if (cfg.renormalize) {
    post = [&](std::span<double> y) {
      const HEState h = unpack(y, kB);
      detail::CompensatedSum total;
      for (double p : sector_probabilities(h, system.spectrum, system.partition)) total += p;
      const double shift = std::log(total.value());
      for (std::size_t k = 0; k < h.alpha.size(); ++k) y[k] += shift;
    };
  }
  std::vector<double> y0(initial.alpha);
  y0.insert(y0.end(), initial.beta.begin(), initial.beta.end());
  traj.stats = integrate_ode(rhs, std::move(y0), 0.0, cfg, observer, post);
  return traj;
}

Trajectory integrate_full(const FullState& initial, const System& system,
                          const IntegratorConfig& config) {
  if (initial.p.size() != system.spectrum.size()) {
    throw Error(ErrorCode::InvalidArgument, "population vector does not match the spectrum");
  }
  return integrate_populations(initial, system, config);
}

}  // namespace hesim
