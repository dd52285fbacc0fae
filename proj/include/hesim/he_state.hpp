#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hesim/full_state.hpp"
#include "hesim/spectrum.hpp"

namespace hesim {

/// Reduced state: one (α_K, β_K) pair per sector. Level populations are
/// p_i = exp(-α_K - β_K ε_i) for i in sector K.
struct HEState {
  std::vector<double> alpha;
  std::vector<double> beta;
  double kB = 1.0;

  std::size_t sector_count() const noexcept { return alpha.size(); }

  friend bool operator==(const HEState&, const HEState&) = default;
};

struct SectorThermo {
  double p = 0.0;         // p_K
  double s = 0.0;         // -kB ln p_K
  double lnZ = 0.0;       // ln Z_K(β_K)
  double E = 0.0;         // ⟨H_K⟩
  double E2 = 0.0;        // ⟨H_K H_K⟩
  double S = 0.0;         // ⟨S_K⟩
  double SH = 0.0;        // ⟨S_K H_K⟩
  double E_proper = 0.0;  // ⟨H_K⟩_K
  double S_proper = 0.0;  // ⟨S̃_K⟩_K
};

/// ln Σ g exp(-β ε), shifted so that |β ε| up to ~700 does not overflow.
double log_partition_function(std::span<const double> energy, std::span<const double> degeneracy,
                              double beta);
double log_partition_function(const SectorLevels& levels, double beta);

/// α_K = ln Z_K(β_K) - ln p_K. Throws ZeroSectorProbability for p_K <= 0 and
/// InvalidArgument for size mismatches or Σ p_K off 1 by more than 1e-9.
HEState from_p_beta(std::span<const double> p, std::span<const double> beta,
                    const Spectrum& spectrum, const SectorPartition& partition, double kB = 1.0);

SectorThermo sector_thermo(const HEState& state, const Spectrum& spectrum,
                           const SectorPartition& partition, std::size_t sector);

std::vector<SectorThermo> all_sector_thermo(const HEState& state, const Spectrum& spectrum,
                                            const SectorPartition& partition);

/// p_K = exp(ln Z_K - α_K) for every sector.
std::vector<double> sector_probabilities(const HEState& state, const Spectrum& spectrum,
                                         const SectorPartition& partition);

FullState to_full_populations(const HEState& state, const Spectrum& spectrum,
                              const SectorPartition& partition);

/// kB Σ_K (α_K p_K + β_K ⟨H_K⟩).
double overall_entropy(const HEState& state, const Spectrum& spectrum,
                       const SectorPartition& partition);

double total_energy(const HEState& state, const Spectrum& spectrum,
                    const SectorPartition& partition);

/// Throws InvalidArgument when the state does not match the partition shape.
void check_shape(const HEState& state, const SectorPartition& partition);

}  // namespace hesim
