#include "hesim/full_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"
#include "hesim/kernels.hpp"

namespace hesim {
namespace {

void check_size(const FullState& fs, const Spectrum& spectrum) {
  if (fs.p.size() != spectrum.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "state has " + std::to_string(fs.p.size()) + " populations for " +
                    std::to_string(spectrum.size()) + " levels");
  }
}

}  // namespace

double total_probability(const FullState& fs, const Spectrum& spectrum) {
  check_size(fs, spectrum);
  return kernels::dot(fs.p, spectrum.degeneracies());
}

double entropy(const FullState& fs, const Spectrum& spectrum) {
  check_size(fs, spectrum);
  std::vector<double> s(fs.p.size());
  kernels::neg_log(fs.p, fs.kB, s);
  detail::CompensatedSum acc;
  const auto g = spectrum.degeneracies();
  for (std::size_t i = 0; i < s.size(); ++i) acc += g[i] * fs.p[i] * s[i];
  return acc.value();
}

double mean_energy(const FullState& fs, const Spectrum& spectrum) {
  check_size(fs, spectrum);
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < fs.p.size(); ++i) {
    acc += spectrum.degeneracies()[i] * fs.p[i] * spectrum.energy(i);
  }
  return acc.value();
}

SectorAggregates sector_aggregates(const FullState& fs, const Spectrum& spectrum,
                                   const SectorPartition& partition) {
  check_size(fs, spectrum);
  const std::size_t m = partition.sector_count();
  SectorAggregates out;
  out.kB = fs.kB;
  out.p.resize(m);
  out.E.resize(m);
  out.E2.resize(m);
  out.S.resize(m);
  out.SH.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    detail::CompensatedSum p, e, e2, s, sh;
    for (std::size_t i : partition.levels_in(k)) {
      const double gp = spectrum.degeneracies()[i] * fs.p[i];
      const double eps = spectrum.energy(i);
      const double si = fs.p[i] > 0.0 ? -fs.kB * std::log(fs.p[i]) : 0.0;
      p += gp;
      e += gp * eps;
      e2 += gp * eps * eps;
      s += gp * si;
      sh += gp * eps * si;
    }
    out.p[k] = p.value();
    out.E[k] = e.value();
    out.E2[k] = e2.value();
    out.S[k] = s.value();
    out.SH[k] = sh.value();
  }
  return out;
}

AffineFit affine_fit(const FullState& fs, const Spectrum& spectrum,
                     const SectorPartition& partition, std::span<const double> beta_hint) {
  check_size(fs, spectrum);
  const std::size_t m = partition.sector_count();
  if (!beta_hint.empty() && beta_hint.size() != m) {
    throw Error(ErrorCode::InvalidArgument, "beta hint must have one entry per sector");
  }
  const double kB = fs.kB;
  AffineFit fit;
  fit.alpha.resize(m);
  fit.beta.resize(m);
  fit.residual.assign(m, 0.0);

  std::vector<double> w, eps, s;
  for (std::size_t k = 0; k < m; ++k) {
    w.clear();
    eps.clear();
    s.clear();
    for (std::size_t i : partition.levels_in(k)) {
      if (fs.p[i] > 0.0) {
        w.push_back(spectrum.degeneracies()[i] * fs.p[i]);
        eps.push_back(spectrum.energy(i));
        s.push_back(-kB * std::log(fs.p[i]));
      }
    }
    const double hint = beta_hint.empty() ? 0.0 : beta_hint[k];
    if (w.empty()) {
      fit.beta[k] = hint;
      fit.alpha[k] = std::numeric_limits<double>::infinity();
      continue;
    }
    if (w.size() == 1) {
      fit.beta[k] = hint;
      fit.alpha[k] = s[0] / kB - hint * eps[0];
      continue;
    }
    double wsum = 0.0;
    for (double x : w) wsum += x;
    for (double& x : w) x /= wsum;
    const auto raw = kernels::weighted_sums(w, eps, s);
    const auto c = kernels::centered_sums(w, eps, s, raw.we, raw.ws);
    if (!(c.ee > 0.0)) {
      throw Error(ErrorCode::DegenerateSectorEnergies,
                  "sector " + std::to_string(k + 1) + " has no energy spread");
    }
    const double b = c.se / (kB * c.ee);
    fit.beta[k] = b;
    fit.alpha[k] = raw.ws / kB - b * raw.we;
    double r = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      r = std::max(r, std::fabs((s[j] - raw.ws) - kB * b * (eps[j] - raw.we)));
    }
    fit.residual[k] = r;
    fit.max_residual = std::max(fit.max_residual, r);
  }
  return fit;
}

}  // namespace hesim
