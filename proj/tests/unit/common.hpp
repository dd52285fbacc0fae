#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <doctest.h>

#include "hesim/dynamics.hpp"
#include "hesim/error.hpp"
#include "hesim/he_state.hpp"
#include "hesim/nh_composite.hpp"
#include "hesim/spectrum.hpp"

namespace fixture {

inline hesim::ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const hesim::Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return hesim::ErrorCode::InvalidArgument;
}

inline hesim::Spectrum ladder(const std::vector<double>& eps, std::vector<int> g = {}) {
  if (g.empty()) g.assign(eps.size(), 1);
  std::vector<hesim::EnergyLevel> levels;
  for (std::size_t i = 0; i < eps.size(); ++i) levels.push_back({eps[i], g[i]});
  return hesim::Spectrum::build(levels);
}

inline hesim::SectorPartition cut(const hesim::Spectrum& s, std::vector<std::size_t> cuts) {
  return hesim::SectorPartition::contiguous(s, cuts);
}

// Sectors ε = {1,2} and {3,4}, p = (0.6, 0.4), β = (1, 0.5).
inline hesim::System fix_b_system(std::vector<double> tau = {1.0, 1.0}) {
  auto s = ladder({1, 2, 3, 4});
  auto p = cut(s, {2});
  return hesim::System(std::move(s), std::move(p), std::move(tau));
}

inline hesim::HEState fix_b_state(const hesim::System& sys) {
  const double p[] = {0.6, 0.4};
  const double b[] = {1.0, 0.5};
  return hesim::from_p_beta(p, b, sys.spectrum, sys.partition);
}

// Single-sector two-level system ε = {0, 1}.
inline hesim::Subsystem two_level(std::string label, double beta, double tau = 1.0) {
  auto s = ladder({0, 1});
  auto p = cut(s, {});
  hesim::System sys(std::move(s), std::move(p), {tau});
  const double one[] = {1.0};
  const double b[] = {beta};
  hesim::HEState h = hesim::from_p_beta(one, b, sys.spectrum, sys.partition);
  return hesim::Subsystem{std::move(label), std::move(sys), std::move(h)};
}

inline hesim::Subsystem fix_b_subsystem(std::string label, std::vector<double> tau = {1.0, 1.0}) {
  hesim::System sys = fix_b_system(std::move(tau));
  hesim::HEState h = fix_b_state(sys);
  return hesim::Subsystem{std::move(label), std::move(sys), std::move(h)};
}

inline double logistic_variance(double beta) {
  const double q = 1.0 / (1.0 + std::exp(beta));
  return q * (1.0 - q);
}

}  // namespace fixture

// Frozen oracle values (tests/oracles/golden.py, 50-digit direct summation).
namespace golden {
inline constexpr double alpha1 = -0.17591268871578648;
inline constexpr double alpha2 = -0.10963228394573825;
inline constexpr double populations[] = {0.43863514717800293, 0.16136485282199707,
                                         0.24898373248074183, 0.15101626751925817};
inline constexpr double entropy = 1.287472459773859;
inline constexpr double energy = 2.1123811203412552;
inline constexpr double E1 = 0.76136485282199707;
inline constexpr double E2 = 1.3510162675192582;
inline constexpr double proper1 = 1.2689414213699951;
inline constexpr double B_H = 2.1123811203412552;
inline constexpr double B_S = 1.287472459773859;
inline constexpr double B_HH = 5.7412084311007984;
inline constexpr double B_SH = 3.1306027573737955;
inline constexpr double sea_alpha = 0.60874780657478231;
inline constexpr double sea_beta = 0.32130785806750094;
inline constexpr double entropy_production = 0.066132108020708172;
inline constexpr double full_rhs[] = {-0.046481444271427537, 0.092417489850969358,
                                      -0.045390646887656103, -0.00054539869188571725};
inline constexpr double dbeta[] = {-0.67869214193249906, -0.17869214193249906};
inline constexpr double dalpha[] = {0.7846604952905688, 0.71838009052052057};
inline constexpr double variance = 1.2790544335266218;
inline constexpr double fluctuation = 0.12897645171390935;
inline constexpr double covariance = 0.19233140635359158;
inline constexpr double beta_tau12 = 0.35487465712940123;
inline constexpr double beta_SE = 0.31894420541078726;
inline constexpr double pK_SE = 0.65427597713460251;
inline constexpr double alpha_SE = 0.65161904793464185;
inline constexpr double logistic_root = 1.0000021431568106;
inline constexpr double ln_two_terms = -0.68673831248177717;
inline constexpr double fix_c_vA = 0.19661193324148185;
inline constexpr double fix_c_vB = 0.10499358540350652;
inline constexpr double fix_c_beta = 1.3481155977357682;
inline constexpr double fix_c_flow = 0.068443680662343415;
inline constexpr double fix_c_final = 1.4237640865169591;
inline constexpr double three_vA = 2475.1657271185994;
inline constexpr double three_vB = 2377.5895991112932;
inline constexpr double three_vJ = 1.2790544335266218;
inline constexpr double three_beta_JA = 0.20006265407362954;
inline constexpr double three_beta_JB = 0.44993080565652352;
inline constexpr double three_beta_AB = 0.32499672986507653;
inline constexpr double three_E_AJ = 0.15507921571220088;
inline constexpr double three_E_JB = 0.16451575136700165;
inline constexpr double three_beta_ss = 0.32499867522390902;
}  // namespace golden
