#include "hesim/sea_potentials.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"
#include "hesim/kernels.hpp"

namespace hesim {
namespace {

constexpr std::size_t kCenteredThreshold = 16;

}  // namespace

void check_relaxation_times(std::span<const double> tau, const SectorPartition& partition) {
  if (tau.size() != partition.sector_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "expected " + std::to_string(partition.sector_count()) + " relaxation times, got " +
                    std::to_string(tau.size()));
  }
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (!(tau[k] > 0.0) || !std::isfinite(tau[k])) {
      throw Error(ErrorCode::InvalidArgument,
                  "relaxation time of sector " + std::to_string(k + 1) + " must be positive");
    }
  }
}

WeightedMoments weighted_moments(const FullState& fs, const Spectrum& spectrum,
                                 const SectorPartition& partition, std::span<const double> tau) {
  check_relaxation_times(tau, partition);
  if (fs.p.size() != spectrum.size()) {
    throw Error(ErrorCode::InvalidArgument, "population vector does not match the spectrum");
  }
  const std::size_t n = spectrum.size();
  const auto g = spectrum.degeneracies();

  std::vector<detail::CompensatedSum> pk(partition.sector_count());
  for (std::size_t i = 0; i < n; ++i) pk[partition.sector_of(i)] += g[i] * fs.p[i];
  detail::CompensatedSum inv;
  for (std::size_t k = 0; k < pk.size(); ++k) inv += pk[k].value() / tau[k];
  if (!(inv.value() > 0.0)) {
    throw Error(ErrorCode::ZeroPopulationTotal, "no populated sector to weight");
  }

  WeightedMoments m;
  m.kB = fs.kB;
  m.tilde_tau = 1.0 / inv.value();
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = m.tilde_tau / tau[partition.sector_of(i)];
  m.w.resize(n);
  kernels::triple_product(fs.p, g, scale, m.w);
  m.s.resize(n);
  kernels::neg_log(fs.p, fs.kB, m.s);

  const auto eps = spectrum.energies();
  const auto raw = kernels::weighted_sums(m.w, eps, m.s);
  m.B_H = raw.we;
  m.B_S = raw.ws;
  m.B_HH = raw.wee;
  m.B_SH = raw.wse;
  const auto c = kernels::centered_sums(m.w, eps, m.s, m.B_H, m.B_S);
  m.var_S = c.ss;
  if (n > kCenteredThreshold) {
    m.var_H = c.ee;
    m.cov_SH = c.se;
  } else {
    m.var_H = m.B_HH - m.B_H * m.B_H;
    m.cov_SH = m.B_SH - m.B_S * m.B_H;
  }
  return m;
}

WeightedMoments weighted_moments(const HEState& state, const Spectrum& spectrum,
                                 const SectorPartition& partition, std::span<const double> tau) {
  return weighted_moments(to_full_populations(state, spectrum, partition), spectrum, partition,
                          tau);
}

bool is_degenerate(const WeightedMoments& m) {
  return !(m.var_H > 1e-14 * std::max(1.0, m.B_HH));
}

SeaPotentials solve_potentials(const WeightedMoments& m, DegeneratePolicy policy) {
  if (is_degenerate(m)) {
    if (policy == DegeneratePolicy::ZeroBeta) return {m.B_S / m.kB, 0.0};
    throw Error(ErrorCode::DegenerateVariance,
                "weighted energy variance " + std::to_string(m.var_H) + " is degenerate");
  }
  SeaPotentials out;
  out.beta = m.cov_SH / (m.kB * m.var_H);
  out.alpha = (m.B_S - m.kB * out.beta * m.B_H) / m.kB;
  return out;
}

MassieuEigenvalues massieu_eigenvalues(const WeightedMoments& m, const Spectrum& spectrum,
                                       const SeaPotentials& pots) {
  MassieuEigenvalues out;
  out.m.resize(m.w.size());
  const auto sums = kernels::massieu(m.w, spectrum.energies(), m.s, m.kB * pots.alpha,
                                     m.kB * pots.beta, out.m);
  out.mean = sums.wm;
  out.energy = sums.wme;
  out.square = sums.wmm;
  return out;
}

double entropy_production(const MassieuEigenvalues& eig, const WeightedMoments& m) {
  return eig.square / (m.kB * m.tilde_tau);
}

BetaDecomposition beta_decomposition(const FullState& fs, const Spectrum& spectrum,
                                     const SectorPartition& partition,
                                     std::span<const double> tau) {
  const WeightedMoments m = weighted_moments(fs, spectrum, partition, tau);
  const SeaPotentials pots = solve_potentials(m);
  const std::size_t nsec = partition.sector_count();
  const double kB = m.kB;

  BetaDecomposition out;
  out.beta = pots.beta;
  out.leverage.assign(nsec, 0.0);
  out.mean_energy.assign(nsec, 0.0);
  out.mean_entropy.assign(nsec, 0.0);
  out.variance.assign(nsec, 0.0);
  out.beta_hat.assign(nsec, 0.0);

  detail::CompensatedSum within, between;
  std::vector<double> w, e, s;
  for (std::size_t k = 0; k < nsec; ++k) {
    w.clear();
    e.clear();
    s.clear();
    for (std::size_t i : partition.levels_in(k)) {
      w.push_back(m.w[i]);
      e.push_back(spectrum.energy(i));
      s.push_back(m.s[i]);
    }
    detail::CompensatedSum wk;
    for (double x : w) wk += x;
    const double lev = wk.value();
    out.leverage[k] = lev;
    if (!(lev > 0.0)) continue;
    for (double& x : w) x /= lev;
    const auto raw = kernels::weighted_sums(w, e, s);
    const auto c = kernels::centered_sums(w, e, s, raw.we, raw.ws);
    out.mean_energy[k] = raw.we;
    out.mean_entropy[k] = raw.ws;
    out.variance[k] = c.ee;
    if (c.ee > 0.0) {
      out.beta_hat[k] = c.se / (kB * c.ee);
      within += lev * c.ee * out.beta_hat[k];
    }
    between += lev * (raw.ws - m.B_S) * (raw.we - m.B_H) / kB;
  }
  out.fluctuation_term = within.value() / m.var_H;
  out.covariance_term = between.value() / m.var_H;
  return out;
}

}  // namespace hesim
