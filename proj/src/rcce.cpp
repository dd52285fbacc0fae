#include "hesim/rcce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canonical.hpp"
#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"

namespace hesim {
namespace {

struct SectorTarget {
  double p;
  double proper_energy;
};

SectorTarget checked_target(const SectorAggregates& target, const SectorLevels& lv,
                            std::size_t k) {
  if (!(target.p[k] > 0.0)) {
    throw Error(ErrorCode::ZeroSectorProbability,
                "sector " + std::to_string(k + 1) + " has p_K = " + std::to_string(target.p[k]));
  }
  const double u = target.E[k] / target.p[k];
  if (lv.energy.size() >= 2) {
    const double lo = *std::min_element(lv.energy.begin(), lv.energy.end());
    const double hi = *std::max_element(lv.energy.begin(), lv.energy.end());
    if (!(u > lo && u < hi)) {
      throw Error(ErrorCode::EnergyOutOfRange,
                  "sector " + std::to_string(k + 1) + " proper energy " + std::to_string(u) +
                      " outside (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
    }
  }
  return {target.p[k], u};
}

void check_target_shape(const SectorAggregates& target, const SectorPartition& partition) {
  if (target.p.size() != partition.sector_count() || target.E.size() != partition.sector_count()) {
    throw Error(ErrorCode::InvalidArgument, "aggregates do not match the partition");
  }
}

// Entropy of one sector's per-state populations.
double sector_entropy(const std::vector<double>& q, const std::vector<double>& g) {
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < q.size(); ++i) acc += -g[i] * q[i] * std::log(q[i]);
  return acc.value();
}

std::vector<double> maxent_sector(const SectorLevels& lv, const SectorTarget& t,
                                  const MaxEntOptions& opt, std::size_t k) {
  const auto& e = lv.energy;
  const auto& g = lv.degeneracy;
  const std::size_t n = e.size();

  // Feasible interior start: uniform mixed with a point mass at an extreme level.
  double gsum = 0.0, gesum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gsum += g[i];
    gesum += g[i] * e[i];
  }
  std::vector<double> q(n, t.p / gsum);
  const double e_uniform = t.p * gesum / gsum;
  const double e_target = t.p * t.proper_energy;
  if (e_target != e_uniform) {
    const auto it = e_target > e_uniform ? std::max_element(e.begin(), e.end())
                                         : std::min_element(e.begin(), e.end());
    const std::size_t j = static_cast<std::size_t>(it - e.begin());
    const double mix = (e_target - e_uniform) / (t.p * e[j] - e_uniform);
    for (auto& x : q) x *= (1.0 - mix);
    q[j] += mix * t.p / g[j];
  }

  // Ascent direction: the entropy gradient scaled by q/g and projected onto the
  // null space of the constraint rows g and gε in that metric. Convergence is
  // judged on the plain Euclidean projection of the gradient. Both projections
  // centre ε first so the two rows are orthogonal.
  double a11 = 0.0, a1e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a11 += g[i] * g[i];
    a1e += g[i] * g[i] * e[i];
  }
  std::vector<double> ec(n);
  double a22 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ec[i] = e[i] - a1e / a11;
    a22 += g[i] * g[i] * ec[i] * ec[i];
  }

  std::vector<double> grad(n), d(n), trial(n), em(n);
  double f = sector_entropy(q, g);
  for (long it = 0; it < opt.max_iterations; ++it) {
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = -g[i] * (std::log(q[i]) + 1.0);
      r1 += g[i] * grad[i];
      r2 += g[i] * ec[i] * grad[i];
    }
    double proj2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = grad[i] - (r1 / a11) * g[i] - (r2 / a22) * g[i] * ec[i];
      proj2 += c * c;
    }
    if (std::sqrt(proj2) < opt.gradient_tol) return q;

    double b11 = 0.0, b1e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      b11 += q[i] * g[i];
      b1e += q[i] * g[i] * e[i];
    }
    double b22 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      em[i] = e[i] - b1e / b11;
      b22 += q[i] * g[i] * em[i] * em[i];
      s1 += q[i] * grad[i];
      s2 += q[i] * em[i] * grad[i];
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = q[i] / g[i] * (grad[i] - (s1 / b11) * g[i] - (s2 / b22) * g[i] * em[i]);
      norm2 += d[i] * grad[i];
    }

    double step = 1.0;
    bool accepted = false;
    while (step > 1e-300) {
      bool positive = true;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = q[i] + step * d[i];
        positive = positive && trial[i] > 0.0;
      }
      if (positive) {
        const double ft = sector_entropy(trial, g);
        if (ft >= f + 1e-4 * step * norm2) {
          q.swap(trial);
          f = ft;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    // No ascent left at working precision: accept if the gradient is already tiny.
    if (!accepted) {
      if (std::sqrt(proj2) < 1e3 * opt.gradient_tol) return q;
      break;
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "maximum-entropy ascent in sector " + std::to_string(k + 1) + " did not converge");
}

}  // namespace

HEState rcce_project(const SectorAggregates& target, const Spectrum& spectrum,
                     const SectorPartition& partition) {
  check_target_shape(target, partition);
  const std::size_t m = partition.sector_count();
  HEState out;
  out.kB = target.kB;
  out.alpha.resize(m);
  out.beta.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const SectorLevels lv = sector_levels(spectrum, partition, k);
    const SectorTarget t = checked_target(target, lv, k);
    const double b =
        lv.energy.size() >= 2 ? detail::solve_canonical_beta(lv.energy, lv.degeneracy, t.proper_energy)
                              : 0.0;
    out.beta[k] = b;
    out.alpha[k] = log_partition_function(lv, b) - std::log(t.p);
  }
  return out;
}

HEState rcce_project(const FullState& fs, const Spectrum& spectrum,
                     const SectorPartition& partition) {
  return rcce_project(sector_aggregates(fs, spectrum, partition), spectrum, partition);
}

FullState brute_force_maxent(const SectorAggregates& target, const Spectrum& spectrum,
                             const SectorPartition& partition, const MaxEntOptions& options) {
  check_target_shape(target, partition);
  FullState out;
  out.kB = target.kB;
  out.p.assign(spectrum.size(), 0.0);
  for (std::size_t k = 0; k < partition.sector_count(); ++k) {
    const SectorLevels lv = sector_levels(spectrum, partition, k);
    const SectorTarget t = checked_target(target, lv, k);
    const auto members = partition.levels_in(k);
    if (members.size() == 1) {
      out.p[members[0]] = t.p / lv.degeneracy[0];
      continue;
    }
    const auto q = maxent_sector(lv, t, options, k);
    for (std::size_t j = 0; j < members.size(); ++j) out.p[members[j]] = q[j];
  }
  return out;
}

}  // namespace hesim
