#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "hesim/sea_potentials.hpp"

using namespace hesim;
using doctest::Approx;

namespace {

struct Case {
  Spectrum spectrum;
  SectorPartition partition;
  FullState fs;
  std::vector<double> tau;
};

// Random populated states, on or off the HE manifold, with random τ.
Case random_case(std::mt19937_64& rng, bool on_manifold) {
  std::uniform_real_distribution<double> gap(0.05, 2.0), pop(0.01, 1.0), e0(-5.0, 5.0),
      bd(-1.5, 1.5), td(0.1, 10.0);
  std::uniform_int_distribution<int> gd(1, 4), nd(2, 40), md(1, 5);
  const int n = nd(rng);
  std::vector<double> eps;
  std::vector<int> g;
  double e = e0(rng);
  for (int i = 0; i < n; ++i) {
    e += gap(rng);
    eps.push_back(e);
    g.push_back(gd(rng));
  }
  Spectrum s = fixture::ladder(eps, g);
  const int m = std::min(md(rng), n);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = 1 + i % m;
  SectorPartition part = SectorPartition::arbitrary(s, labels);
  std::vector<double> tau(m);
  for (double& t : tau) t = td(rng);

  FullState fs;
  if (on_manifold) {
    std::vector<double> p(m), b(m);
    double tot = 0.0;
    for (double& x : p) tot += (x = pop(rng));
    for (double& x : p) x /= tot;
    for (double& x : b) x = bd(rng);
    fs = to_full_populations(from_p_beta(p, b, s, part), s, part);
  } else {
    double tot = 0.0;
    for (int i = 0; i < n; ++i) {
      fs.p.push_back(pop(rng));
      tot += fs.p.back() * g[i];
    }
    for (double& x : fs.p) x /= tot;
  }
  return {std::move(s), std::move(part), std::move(fs), std::move(tau)};
}

}  // namespace

TEST_SUITE("sea_potentials") {
  TEST_CASE("weighted moments of FIX-B") {
    const System sys = fixture::fix_b_system();
    const HEState h = fixture::fix_b_state(sys);
    const WeightedMoments m = weighted_moments(h, sys.spectrum, sys.partition, sys.tau);
    CHECK(m.tilde_tau == Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 4; ++i) CHECK(m.w[i] == Approx(golden::populations[i]).epsilon(1e-13));
    CHECK(m.B_H == Approx(golden::B_H).epsilon(1e-13));
    CHECK(m.B_S == Approx(golden::B_S).epsilon(1e-13));
    CHECK(m.B_HH == Approx(golden::B_HH).epsilon(1e-13));
    CHECK(m.B_SH == Approx(golden::B_SH).epsilon(1e-13));
    CHECK(m.var_H == Approx(golden::variance).epsilon(1e-12));

    const FullState fs = to_full_populations(h, sys.spectrum, sys.partition);
    const WeightedMoments mf = weighted_moments(fs, sys.spectrum, sys.partition, sys.tau);
    CHECK(mf.B_SH == Approx(m.B_SH).epsilon(1e-13));
  }

  TEST_CASE("non-uniform relaxation times") {
    const System sys = fixture::fix_b_system({1.0, 2.0});
    const HEState h = fixture::fix_b_state(sys);
    const WeightedMoments m = weighted_moments(h, sys.spectrum, sys.partition, sys.tau);
    CHECK(m.tilde_tau == Approx(1.25).epsilon(1e-14));
    double sector1 = m.w[0] + m.w[1];
    CHECK(sector1 == Approx(0.75).epsilon(1e-14));
    double total = 0.0;
    for (double w : m.w) total += w;
    CHECK(total == Approx(1.0).epsilon(1e-15));
    CHECK(solve_potentials(m).beta == Approx(golden::beta_tau12).epsilon(1e-12));
  }

  TEST_CASE("potentials of FIX-B") {
    const System sys = fixture::fix_b_system();
    const WeightedMoments m = weighted_moments(fixture::fix_b_state(sys), sys.spectrum, sys.partition, sys.tau);
    const SeaPotentials p = solve_potentials(m);
    CHECK(p.beta == Approx(golden::sea_beta).epsilon(1e-12));
    CHECK(p.alpha == Approx(golden::sea_alpha).epsilon(1e-12));
    CHECK(std::fabs(p.beta - 0.32131) <= 5e-4);
    CHECK(std::fabs(p.alpha - 0.60873) <= 5e-4);
    CHECK(p.alpha == Approx(m.B_S - p.beta * m.B_H).epsilon(1e-15));

    const MassieuEigenvalues eig = massieu_eigenvalues(m, sys.spectrum, p);
    CHECK(std::fabs(eig.mean) <= 1e-12);
    CHECK(std::fabs(eig.energy) <= 1e-12);
    CHECK(entropy_production(eig, m) == Approx(golden::entropy_production).epsilon(1e-11));
  }

  TEST_CASE("single-sector and canonical states") {
    const Spectrum s = fixture::ladder({0, 1, 2, 5});
    const auto one = fixture::cut(s, {});
    const double p1[] = {1.0}, b1[] = {0.8};
    const HEState h = from_p_beta(p1, b1, s, one, 1.7);
    const WeightedMoments m = weighted_moments(h, s, one, std::vector<double>{3.0});
    const SeaPotentials pot = solve_potentials(m);
    CHECK(pot.beta == Approx(0.8).epsilon(1e-12));
    CHECK(pot.alpha == Approx(h.alpha[0]).epsilon(1e-12));
    const MassieuEigenvalues eig = massieu_eigenvalues(m, s, pot);
    for (double x : eig.m) CHECK(std::fabs(x) <= 1e-12);
    CHECK(entropy_production(eig, m) <= 1e-24);

    // All α_K and β_K equal across sectors.
    const auto two = fixture::cut(s, {1, 3});
    const EquilibriumState eq = equilibrium_state(s, two, 1.2);
    const HEState g = eq.as_he_state();
    const WeightedMoments mg = weighted_moments(g, s, two, std::vector<double>{1.0, 0.3, 4.0});
    CHECK(solve_potentials(mg).beta == Approx(eq.beta).epsilon(1e-12));
  }

  TEST_CASE("degenerate variance") {
    const Spectrum s = fixture::ladder({0, 1});
    const auto part = fixture::cut(s, {1});
    const FullState fs{{1.0, 0.0}};
    const WeightedMoments m = weighted_moments(fs, s, part, std::vector<double>{1.0, 1.0});
    CHECK(is_degenerate(m));
    CHECK(fixture::code_of([&] { solve_potentials(m); }) == ErrorCode::DegenerateVariance);
    const SeaPotentials p = solve_potentials(m, DegeneratePolicy::ZeroBeta);
    CHECK(p.beta == 0.0);
    CHECK(p.alpha == m.B_S);
  }

  TEST_CASE("zero population total") {
    const Spectrum s = fixture::ladder({0, 1});
    const auto part = fixture::cut(s, {});
    CHECK(fixture::code_of([&] {
            weighted_moments(FullState{{0.0, 0.0}}, s, part, std::vector<double>{1.0});
          }) == ErrorCode::ZeroPopulationTotal);
    CHECK(fixture::code_of([&] { check_relaxation_times(std::vector<double>{-1.0}, part); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("Massieu identities on randomized states") {
    std::mt19937_64 rng(0x5eaf00d);
    int cases = 0;
    for (int trial = 0; trial < 1200; ++trial) {
      const Case c = random_case(rng, trial % 2 == 0);
      const WeightedMoments m = weighted_moments(c.fs, c.spectrum, c.partition, c.tau);
      if (is_degenerate(m)) continue;
      ++cases;
      const SeaPotentials p = solve_potentials(m);
      const MassieuEigenvalues eig = massieu_eigenvalues(m, c.spectrum, p);
      double scale_m = 1.0;
      for (double x : eig.m) scale_m = std::max(scale_m, std::fabs(x));
      const double scale_e = std::max({1.0, std::fabs(c.spectrum.min_energy()), std::fabs(c.spectrum.max_energy())});
      CHECK(std::fabs(eig.mean) <= 1e-12);
      CHECK(std::fabs(eig.energy) <= 1e-12 * scale_m * scale_e);
      const double sigma = entropy_production(eig, m);
      CHECK(sigma >= 0.0);

      // τ rescaling leaves the potentials and scales dS/dt.
      std::vector<double> tau3 = c.tau;
      for (double& t : tau3) t *= 3.0;
      const WeightedMoments m3 = weighted_moments(c.fs, c.spectrum, c.partition, tau3);
      const SeaPotentials p3 = solve_potentials(m3);
      CHECK(p3.beta == Approx(p.beta).epsilon(1e-12).scale(1.0));
      CHECK(std::fabs(p3.alpha - p.alpha) <= 1e-12 * (1.0 + std::fabs(m.B_S) + std::fabs(p.beta * m.B_H)));
      CHECK(entropy_production(massieu_eigenvalues(m3, c.spectrum, p3), m3) ==
            Approx(sigma / 3.0).epsilon(1e-10).scale(1e-14));

      const BetaDecomposition d = beta_decomposition(c.fs, c.spectrum, c.partition, c.tau);
      CHECK(std::fabs(d.fluctuation_term + d.covariance_term - p.beta) <= 1e-12 * std::max(1.0, std::fabs(p.beta)));
    }
    CHECK(cases >= 1000);
  }

  TEST_CASE("beta decomposition of FIX-B") {
    const System sys = fixture::fix_b_system();
    const FullState fs = to_full_populations(fixture::fix_b_state(sys), sys.spectrum, sys.partition);
    const BetaDecomposition d = beta_decomposition(fs, sys.spectrum, sys.partition, sys.tau);
    CHECK(d.fluctuation_term == Approx(golden::fluctuation).epsilon(1e-12));
    CHECK(d.covariance_term == Approx(golden::covariance).epsilon(1e-12));
    CHECK(std::fabs(d.fluctuation_term + d.covariance_term - golden::sea_beta) <= 1e-12);
    CHECK(d.beta_hat[0] == Approx(1.0).epsilon(1e-12));
    CHECK(d.beta_hat[1] == Approx(0.5).epsilon(1e-12));
    CHECK(d.leverage[0] == Approx(0.6).epsilon(1e-13));
  }

  TEST_CASE("beta decomposition limits") {
    // Sector means on one line of slope b with common β_K = b: no covariance excess.
    const Spectrum s = fixture::ladder({0, 1, 2, 3});
    const auto part = fixture::cut(s, {2});
    const EquilibriumState eq = equilibrium_state(s, part, 1.1);
    const FullState fs = to_full_populations(eq.as_he_state(), s, part);
    const BetaDecomposition d = beta_decomposition(fs, s, part, std::vector<double>{1.0, 1.0});
    CHECK(d.fluctuation_term + d.covariance_term == Approx(eq.beta).epsilon(1e-12));
    CHECK(d.beta_hat[0] == Approx(eq.beta).epsilon(1e-12));

    // Almost all weight in sector 1.
    const double p[] = {1.0 - 1e-9, 1e-9}, b[] = {0.7, -2.0};
    const FullState lop = to_full_populations(from_p_beta(p, b, s, part), s, part);
    const BetaDecomposition dl = beta_decomposition(lop, s, part, std::vector<double>{1.0, 1.0});
    CHECK(dl.beta == Approx(0.7).epsilon(1e-6));
  }
}
