#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hesim/spectrum.hpp"

namespace hesim {

/// Per-level occupation probabilities p_i (probability of each state within
/// level i, so the level carries g_i*p_i). Zero entries are allowed.
struct FullState {
  std::vector<double> p;
  double kB = 1.0;

  friend bool operator==(const FullState&, const FullState&) = default;
};

/// Σ g_i p_i.
double total_probability(const FullState& fs, const Spectrum& spectrum);

/// -kB Σ g p ln p with 0 ln 0 = 0.
double entropy(const FullState& fs, const Spectrum& spectrum);

/// Σ g p ε.
double mean_energy(const FullState& fs, const Spectrum& spectrum);

/// Sector sums computed directly from populations.
struct SectorAggregates {
  std::vector<double> p;   // Σ g p
  std::vector<double> E;   // Σ g p ε
  std::vector<double> E2;  // Σ g p ε²
  std::vector<double> S;   // -kB Σ g p ln p
  std::vector<double> SH;  // -kB Σ g p ε ln p
  double kB = 1.0;

  std::size_t sector_count() const noexcept { return p.size(); }
};

SectorAggregates sector_aggregates(const FullState& fs, const Spectrum& spectrum,
                                   const SectorPartition& partition);

/// Per-sector straight-line fit of s_i = -kB ln p_i against ε_i, weighted by g_i p_i.
struct AffineFit {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> residual;  // per sector, max |s_i - kB(α + β ε_i)| over populated levels
  double max_residual = 0.0;
};

/// Sectors with fewer than two populated levels take β from `beta_hint` when given
/// (0 otherwise) and α so that the single point is matched exactly.
AffineFit affine_fit(const FullState& fs, const Spectrum& spectrum,
                     const SectorPartition& partition, std::span<const double> beta_hint = {});

}  // namespace hesim
