#pragma once

// Weighted moments of a population state and the steepest-entropy-ascent
// potentials (α, β) that enforce normalization and energy conservation.

#include <cstddef>
#include <span>
#include <vector>

#include "hesim/full_state.hpp"
#include "hesim/he_state.hpp"
#include "hesim/spectrum.hpp"

namespace hesim {

/// Throws InvalidArgument unless there is one strictly positive τ_K per sector.
void check_relaxation_times(std::span<const double> tau, const SectorPartition& partition);

struct WeightedMoments {
  double tilde_tau = 0.0;
  std::vector<double> w;  // per level, Σ w = 1
  std::vector<double> s;  // per level -kB ln p_i, 0 where p_i = 0
  double B_H = 0.0;
  double B_S = 0.0;
  double B_HH = 0.0;
  double B_SH = 0.0;
  /// Variance of ε, covariance of (s, ε) and variance of s under w. Two-pass
  /// centered sums for more than 16 levels, B-form differences otherwise.
  double var_H = 0.0;
  double cov_SH = 0.0;
  double var_S = 0.0;
  double kB = 1.0;
};

/// Throws ZeroPopulationTotal when Σ_K p_K/τ_K is not positive.
WeightedMoments weighted_moments(const FullState& fs, const Spectrum& spectrum,
                                 const SectorPartition& partition, std::span<const double> tau);
WeightedMoments weighted_moments(const HEState& state, const Spectrum& spectrum,
                                 const SectorPartition& partition, std::span<const double> tau);

struct SeaPotentials {
  double alpha = 0.0;
  double beta = 0.0;
};

enum class DegeneratePolicy {
  Error,       // throw DegenerateVariance
  ZeroBeta,    // β := 0, α := B_S/kB
};

/// True when the weighted energy variance is at or below 1e-14 max(1, B_HH).
bool is_degenerate(const WeightedMoments& m);

SeaPotentials solve_potentials(const WeightedMoments& m,
                               DegeneratePolicy policy = DegeneratePolicy::Error);

struct MassieuEigenvalues {
  std::vector<double> m;  // s_i - kB α - kB β ε_i
  double mean = 0.0;      // ⟨m⟩_w
  double energy = 0.0;    // ⟨m ε⟩_w
  double square = 0.0;    // ⟨m²⟩_w
};

MassieuEigenvalues massieu_eigenvalues(const WeightedMoments& m, const Spectrum& spectrum,
                                       const SeaPotentials& pots);

/// dS/dt = ⟨m²⟩_w / (kB τ̃).
double entropy_production(const MassieuEigenvalues& eig, const WeightedMoments& m);

struct BetaDecomposition {
  double fluctuation_term = 0.0;
  double covariance_term = 0.0;
  double beta = 0.0;
  std::vector<double> leverage;      // w_K = Σ_{i∈K} w_i
  std::vector<double> mean_energy;   // ⟨ε⟩_w^K
  std::vector<double> mean_entropy;  // ⟨s⟩_w^K
  std::vector<double> variance;      // within-sector weighted variance of ε
  std::vector<double> beta_hat;      // within-sector slope, 0 for a single populated level
};

/// β split into the leverage-weighted average of within-sector slopes and the
/// covariance of sector means. Throws DegenerateVariance.
BetaDecomposition beta_decomposition(const FullState& fs, const Spectrum& spectrum,
                                     const SectorPartition& partition,
                                     std::span<const double> tau);

}  // namespace hesim
