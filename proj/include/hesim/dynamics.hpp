#pragma once

// Relaxation dynamics of an isolated system, in the reduced (α_K, β_K) form and
// in the full per-level population form.

#include <cstddef>
#include <span>
#include <vector>

#include "hesim/full_state.hpp"
#include "hesim/he_state.hpp"
#include "hesim/ode.hpp"
#include "hesim/sea_potentials.hpp"
#include "hesim/spectrum.hpp"

namespace hesim {

/// Spectrum, sector partition and per-sector relaxation times.
struct System {
  Spectrum spectrum;
  SectorPartition partition;
  std::vector<double> tau;

  /// Validates τ against the partition.
  System(Spectrum s, SectorPartition p, std::vector<double> t);

  std::size_t sector_count() const noexcept { return partition.sector_count(); }
  double tau_min() const;
  double tau_max() const;
};

struct ReducedRates {
  std::vector<double> dalpha;
  std::vector<double> dbeta;
  SeaPotentials potentials;
};

ReducedRates reduced_rhs(const HEState& state, const System& system,
                         DegeneratePolicy policy = DegeneratePolicy::Error);

/// dp_i/dt = p_i m_i / (kB τ_K(i)); unpopulated levels stay at rate 0.
std::vector<double> full_rhs(const FullState& fs, const System& system,
                             DegeneratePolicy policy = DegeneratePolicy::Error);

struct SectorRate {
  double dE = 0.0;
  double dS = 0.0;
};

std::vector<SectorRate> sector_rates(const HEState& state, const System& system);

struct EquilibriumState {
  double beta = 0.0;
  double alpha = 0.0;
  std::vector<double> p;  // per sector

  /// The same Gibbs state written as an HE state (every α_K = α, β_K = β).
  HEState as_he_state(double kB = 1.0) const;
};

/// Gibbs state with mean energy E0. Throws EnergyOutOfRange or NoConvergence.
EquilibriumState equilibrium_state(const Spectrum& spectrum, const SectorPartition& partition,
                                   double E0);

enum class Mode { Reduced, Full };

struct Sample {
  double t = 0.0;
  HEState state;          // integrated state (reduced) or the per-sector affine fit (full)
  FullState populations;  // expanded (reduced) or integrated (full)
  SeaPotentials potentials;
  double energy = 0.0;
  double entropy = 0.0;
  double entropy_production = 0.0;
  std::vector<double> p_K;
  std::vector<double> E_K;
  std::vector<double> S_K;
  double fit_residual = 0.0;  // affine-fit residual of the populations
};

struct Trajectory {
  Mode mode = Mode::Reduced;
  std::vector<Sample> samples;
  OdeStats stats;

  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
};

/// Observables of a population state at time t. `he` is used as the reported
/// state when given, otherwise the affine fit of the populations.
Sample make_sample(double t, const FullState& populations, const System& system,
                   const HEState* he = nullptr, DegeneratePolicy policy = DegeneratePolicy::Error);

Trajectory integrate(const HEState& initial, const System& system, const IntegratorConfig& config,
                     Mode mode = Mode::Reduced);

/// Full-mode integration from arbitrary populations (zero levels allowed).
Trajectory integrate_full(const FullState& initial, const System& system,
                          const IntegratorConfig& config);

}  // namespace hesim
