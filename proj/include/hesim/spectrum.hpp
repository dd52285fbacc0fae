#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hesim {

struct EnergyLevel {
  double energy = 0.0;
  int degeneracy = 1;

  friend bool operator==(const EnergyLevel&, const EnergyLevel&) = default;
};

/// Distinct energy eigenvalues with their degeneracies, sorted ascending.
class Spectrum {
 public:
  /// Validates and sorts. Throws DuplicateEnergy, NonPositiveDegeneracy, EmptySpectrum.
  static Spectrum build(std::vector<EnergyLevel> levels);

  std::size_t size() const noexcept { return energy_.size(); }
  double energy(std::size_t i) const { return energy_[i]; }
  int degeneracy(std::size_t i) const { return static_cast<int>(degeneracy_[i]); }

  std::span<const double> energies() const noexcept { return energy_; }
  /// Degeneracies stored as doubles so they can feed the arithmetic kernels directly.
  std::span<const double> degeneracies() const noexcept { return degeneracy_; }

  std::vector<EnergyLevel> levels() const;

  /// Total Hilbert-space dimension, sum of degeneracies.
  long long dimension() const noexcept;

  double min_energy() const { return energy_.front(); }
  double max_energy() const { return energy_.back(); }

  /// Every energy replaced by energy + c; degeneracies unchanged.
  Spectrum shifted(double c) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  Spectrum() = default;
  std::vector<double> energy_;
  std::vector<double> degeneracy_;
};

inline Spectrum build_spectrum(std::vector<EnergyLevel> levels) {
  return Spectrum::build(std::move(levels));
}

inline Spectrum shift_energies(const Spectrum& spectrum, double c) { return spectrum.shifted(c); }

/// Disjoint assignment of the spectrum's levels to sectors.
///
/// Sectors are addressed 0..M-1 in the API. Level index sets are kept in ascending
/// level order inside each sector.
class SectorPartition {
 public:
  /// Contiguous energy shells. `cuts` are 1-based level counts after which a new
  /// sector starts: cuts = {2} on four levels gives sectors {0,1} and {2,3}.
  /// Throws InvalidCut when cuts are out of 1..N-1 or not strictly increasing.
  static SectorPartition contiguous(const Spectrum& spectrum, std::span<const std::size_t> cuts);

  /// `labels[i]` is the 1-based sector of level i. Labels must cover 1..M with no gap.
  /// Throws LabelGap (a label in 1..max unused, or label < 1) or InvalidArgument
  /// (length mismatch).
  static SectorPartition arbitrary(const Spectrum& spectrum, std::span<const int> labels);

  std::size_t sector_count() const noexcept { return members_.size(); }
  std::size_t level_count() const noexcept { return sector_of_.size(); }

  /// 0-based sector of level i.
  std::size_t sector_of(std::size_t level) const { return sector_of_[level]; }
  std::span<const std::size_t> sector_map() const noexcept { return sector_of_; }
  std::span<const std::size_t> levels_in(std::size_t sector) const { return members_[sector]; }
  std::size_t sector_size(std::size_t sector) const { return members_[sector].size(); }

  /// 1-based labels, the inverse of `arbitrary`.
  std::vector<int> labels() const;

  /// True when every sector is a contiguous run of levels in ascending sector order.
  bool is_contiguous() const;
  /// Level indices where the sector changes; inverse of `contiguous` when is_contiguous().
  std::vector<std::size_t> cuts() const;

  friend bool operator==(const SectorPartition&, const SectorPartition&) = default;

 private:
  SectorPartition() = default;
  static SectorPartition from_labels(std::size_t n, std::span<const std::size_t> zero_based,
                                     std::size_t m);

  std::vector<std::size_t> sector_of_;
  std::vector<std::vector<std::size_t>> members_;
};

inline SectorPartition contiguous_partition(const Spectrum& s, std::span<const std::size_t> cuts) {
  return SectorPartition::contiguous(s, cuts);
}

inline SectorPartition arbitrary_partition(const Spectrum& s, std::span<const int> labels) {
  return SectorPartition::arbitrary(s, labels);
}

/// Energies and degeneracies of one sector, gathered in level order.
struct SectorLevels {
  std::vector<double> energy;
  std::vector<double> degeneracy;
};

SectorLevels sector_levels(const Spectrum& spectrum, const SectorPartition& partition,
                           std::size_t sector);

}  // namespace hesim
