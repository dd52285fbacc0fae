#pragma once

// Maximum-entropy projection of sector aggregates onto the HE family.

#include "hesim/full_state.hpp"
#include "hesim/he_state.hpp"
#include "hesim/spectrum.hpp"

namespace hesim {

/// Unique HE state with the given sector probabilities and energies. Sectors with
/// M_K >= 2 get β_K from the proper-energy constraint; singleton sectors get β_K = 0.
/// Throws ZeroSectorProbability, EnergyOutOfRange or NoConvergence.
HEState rcce_project(const SectorAggregates& target, const Spectrum& spectrum,
                     const SectorPartition& partition);
HEState rcce_project(const FullState& fs, const Spectrum& spectrum,
                     const SectorPartition& partition);

struct MaxEntOptions {
  double gradient_tol = 1e-10;
  long max_iterations = 100000;
};

/// Entropy maximization by projected-gradient ascent with backtracking, sector by
/// sector. Shares nothing with rcce_project beyond input validation and exists
/// to cross-check it.
FullState brute_force_maxent(const SectorAggregates& target, const Spectrum& spectrum,
                             const SectorPartition& partition, const MaxEntOptions& options = {});

}  // namespace hesim
