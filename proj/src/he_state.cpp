#include "hesim/he_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "canonical.hpp"
#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"
#include "hesim/kernels.hpp"

namespace hesim {

double log_partition_function(std::span<const double> energy, std::span<const double> degeneracy,
                              double beta) {
  if (energy.empty() || energy.size() != degeneracy.size()) {
    throw Error(ErrorCode::InvalidArgument, "log_partition_function needs matching nonempty inputs");
  }
  std::vector<double> x(energy.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::log(degeneracy[i]) - beta * energy[i];
    shift = std::max(shift, x[i]);
  }
  return shift + std::log(kernels::sum_exp_shifted(x, shift));
}

double log_partition_function(const SectorLevels& levels, double beta) {
  return log_partition_function(levels.energy, levels.degeneracy, beta);
}

void check_shape(const HEState& state, const SectorPartition& partition) {
  if (state.alpha.size() != partition.sector_count() ||
      state.beta.size() != partition.sector_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "state has " + std::to_string(state.alpha.size()) + " alpha and " +
                    std::to_string(state.beta.size()) + " beta entries for " +
                    std::to_string(partition.sector_count()) + " sectors");
  }
}

HEState from_p_beta(std::span<const double> p, std::span<const double> beta,
                    const Spectrum& spectrum, const SectorPartition& partition, double kB) {
  const std::size_t m = partition.sector_count();
  if (p.size() != m || beta.size() != m) {
    throw Error(ErrorCode::InvalidArgument, "p and beta must have one entry per sector");
  }
  detail::CompensatedSum total;
  for (std::size_t k = 0; k < m; ++k) {
    if (!(p[k] > 0.0)) {
      throw Error(ErrorCode::ZeroSectorProbability,
                  "sector " + std::to_string(k + 1) + " has p_K = " + std::to_string(p[k]));
    }
    total += p[k];
  }
  if (std::fabs(total.value() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument,
                "sector probabilities sum to " + std::to_string(total.value()));
  }
  HEState out;
  out.kB = kB;
  out.beta.assign(beta.begin(), beta.end());
  out.alpha.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.alpha[k] = log_partition_function(sector_levels(spectrum, partition, k), beta[k]) -
                   std::log(p[k]);
  }
  return out;
}

SectorThermo sector_thermo(const HEState& state, const Spectrum& spectrum,
                           const SectorPartition& partition, std::size_t sector) {
  check_shape(state, partition);
  const SectorLevels lv = sector_levels(spectrum, partition, sector);
  std::vector<double> q;
  const double a = state.alpha[sector];
  const double b = state.beta[sector];
  const auto st = detail::canonical_stats(lv.energy, lv.degeneracy, b, q);
  const double kB = state.kB;

  SectorThermo t;
  t.lnZ = st.lnZ;
  t.p = std::exp(st.lnZ - a);
  t.s = kB * (a - st.lnZ);
  t.E_proper = st.mean;
  t.E = t.p * st.mean;
  t.E2 = t.p * st.second;
  t.S = kB * (a * t.p + b * t.E);
  t.SH = kB * (a * t.E + b * t.E2);
  t.S_proper = kB * (st.lnZ + b * st.mean);
  return t;
}

std::vector<SectorThermo> all_sector_thermo(const HEState& state, const Spectrum& spectrum,
                                            const SectorPartition& partition) {
  std::vector<SectorThermo> out;
  out.reserve(partition.sector_count());
  for (std::size_t k = 0; k < partition.sector_count(); ++k) {
    out.push_back(sector_thermo(state, spectrum, partition, k));
  }
  return out;
}

std::vector<double> sector_probabilities(const HEState& state, const Spectrum& spectrum,
                                         const SectorPartition& partition) {
  check_shape(state, partition);
  std::vector<double> p(partition.sector_count());
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp(log_partition_function(sector_levels(spectrum, partition, k), state.beta[k]) -
                    state.alpha[k]);
  }
  return p;
}

FullState to_full_populations(const HEState& state, const Spectrum& spectrum,
                              const SectorPartition& partition) {
  check_shape(state, partition);
  const std::size_t n = spectrum.size();
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = partition.sector_of(i);
    a[i] = state.alpha[k];
    b[i] = state.beta[k];
  }
  FullState fs;
  fs.kB = state.kB;
  fs.p.resize(n);
  kernels::exp_affine(a, b, spectrum.energies(), fs.p);
  return fs;
}

double overall_entropy(const HEState& state, const Spectrum& spectrum,
                       const SectorPartition& partition) {
  detail::CompensatedSum acc;
  for (const auto& t : all_sector_thermo(state, spectrum, partition)) acc += t.S;
  return acc.value();
}

double total_energy(const HEState& state, const Spectrum& spectrum,
                    const SectorPartition& partition) {
  detail::CompensatedSum acc;
  for (const auto& t : all_sector_thermo(state, spectrum, partition)) acc += t.E;
  return acc.value();
}

}  // namespace hesim
