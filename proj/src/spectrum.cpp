#include "hesim/spectrum.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hesim/error.hpp"

namespace hesim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateEnergy: return "DuplicateEnergy";
    case ErrorCode::NonPositiveDegeneracy: return "NonPositiveDegeneracy";
    case ErrorCode::EmptySpectrum: return "EmptySpectrum";
    case ErrorCode::InvalidCut: return "InvalidCut";
    case ErrorCode::EmptySector: return "EmptySector";
    case ErrorCode::LabelGap: return "LabelGap";
    case ErrorCode::ZeroSectorProbability: return "ZeroSectorProbability";
    case ErrorCode::DegenerateSectorEnergies: return "DegenerateSectorEnergies";
    case ErrorCode::EnergyOutOfRange: return "EnergyOutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroPopulationTotal: return "ZeroPopulationTotal";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateEnergy:
    case ErrorCode::NonPositiveDegeneracy:
    case ErrorCode::EmptySpectrum:
    case ErrorCode::InvalidCut:
    case ErrorCode::EmptySector:
    case ErrorCode::LabelGap:
    case ErrorCode::ZeroSectorProbability:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::IoError:
      return true;
    default:
      return false;
  }
}

Spectrum Spectrum::build(std::vector<EnergyLevel> levels) {
  if (levels.empty()) throw Error(ErrorCode::EmptySpectrum, "spectrum needs at least one level");
  for (const auto& l : levels) {
    if (l.degeneracy < 1) {
      throw Error(ErrorCode::NonPositiveDegeneracy,
                  "level at energy " + std::to_string(l.energy) + " has degeneracy " +
                      std::to_string(l.degeneracy));
    }
  }
  std::sort(levels.begin(), levels.end(),
            [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });
  // exact comparison: declared eigenvalues are never merged
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i].energy == levels[i - 1].energy) {
      throw Error(ErrorCode::DuplicateEnergy,
                  "energy " + std::to_string(levels[i].energy) + " appears twice");
    }
  }
  Spectrum s;
  s.energy_.reserve(levels.size());
  s.degeneracy_.reserve(levels.size());
  for (const auto& l : levels) {
    s.energy_.push_back(l.energy);
    s.degeneracy_.push_back(static_cast<double>(l.degeneracy));
  }
  return s;
}

std::vector<EnergyLevel> Spectrum::levels() const {
  std::vector<EnergyLevel> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = {energy_[i], degeneracy(i)};
  return out;
}

long long Spectrum::dimension() const noexcept {
  long long d = 0;
  for (double g : degeneracy_) d += static_cast<long long>(g);
  return d;
}

Spectrum Spectrum::shifted(double c) const {
  Spectrum s = *this;
  for (double& e : s.energy_) e += c;
  return s;
}

SectorPartition SectorPartition::from_labels(std::size_t n, std::span<const std::size_t> zero_based,
                                             std::size_t m) {
  SectorPartition p;
  p.sector_of_.assign(zero_based.begin(), zero_based.end());
  p.members_.assign(m, {});
  for (std::size_t i = 0; i < n; ++i) p.members_[zero_based[i]].push_back(i);
  for (std::size_t k = 0; k < m; ++k) {
    if (p.members_[k].empty()) {
      throw Error(ErrorCode::EmptySector, "sector " + std::to_string(k + 1) + " has no levels");
    }
  }
  return p;
}

SectorPartition SectorPartition::contiguous(const Spectrum& spectrum,
                                            std::span<const std::size_t> cuts) {
  const std::size_t n = spectrum.size();
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    if (c < 1 || c > n - 1 || c <= prev) {
      throw Error(ErrorCode::InvalidCut, "cut " + std::to_string(c) +
                                             " must be strictly increasing within 1.." +
                                             std::to_string(n > 0 ? n - 1 : 0));
    }
    prev = c;
  }
  std::vector<std::size_t> label(n);
  std::size_t k = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next < cuts.size() && i == cuts[next]) {
      ++k;
      ++next;
    }
    label[i] = k;
  }
  return from_labels(n, label, cuts.size() + 1);
}

SectorPartition SectorPartition::arbitrary(const Spectrum& spectrum, std::span<const int> labels) {
  const std::size_t n = spectrum.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "assignment has " + std::to_string(labels.size()) +
                                                " labels for " + std::to_string(n) + " levels");
  }
  int max_label = 0;
  for (int l : labels) {
    if (l < 1) throw Error(ErrorCode::LabelGap, "sector labels start at 1, got " + std::to_string(l));
    max_label = std::max(max_label, l);
  }
  std::vector<bool> used(static_cast<std::size_t>(max_label), false);
  for (int l : labels) used[static_cast<std::size_t>(l - 1)] = true;
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) {
      throw Error(ErrorCode::LabelGap, "label " + std::to_string(k + 1) + " is unused but " +
                                           std::to_string(max_label) + " is used");
    }
  }
  std::vector<std::size_t> zero_based(n);
  for (std::size_t i = 0; i < n; ++i) zero_based[i] = static_cast<std::size_t>(labels[i] - 1);
  return from_labels(n, zero_based, static_cast<std::size_t>(max_label));
}

std::vector<int> SectorPartition::labels() const {
  std::vector<int> out(sector_of_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(sector_of_[i] + 1);
  return out;
}

bool SectorPartition::is_contiguous() const {
  for (std::size_t i = 1; i < sector_of_.size(); ++i) {
    if (sector_of_[i] != sector_of_[i - 1] && sector_of_[i] != sector_of_[i - 1] + 1) return false;
  }
  return sector_of_.empty() || sector_of_.front() == 0;
}

std::vector<std::size_t> SectorPartition::cuts() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < sector_of_.size(); ++i) {
    if (sector_of_[i] != sector_of_[i - 1]) out.push_back(i);
  }
  return out;
}

SectorLevels sector_levels(const Spectrum& spectrum, const SectorPartition& partition,
                           std::size_t sector) {
  SectorLevels out;
  for (std::size_t i : partition.levels_in(sector)) {
    out.energy.push_back(spectrum.energy(i));
    out.degeneracy.push_back(spectrum.degeneracies()[i]);
  }
  return out;
}

}  // namespace hesim
