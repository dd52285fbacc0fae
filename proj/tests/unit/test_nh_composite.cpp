#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "hesim/nh_composite.hpp"

using namespace hesim;
using doctest::Approx;

namespace {

std::vector<Subsystem> fix_c() { return {fixture::two_level("A", 1.0), fixture::two_level("B", 2.0)}; }

// Canonical state of J's system at inverse temperature b.
Subsystem gibbs(std::string label, System sys, double b) {
  const std::size_t m = sys.sector_count();
  std::vector<double> lnz(m), p(m), beta(m, b);
  double zmax = -1e300;
  for (std::size_t k = 0; k < m; ++k) {
    lnz[k] = log_partition_function(sector_levels(sys.spectrum, sys.partition, k), b);
    zmax = std::max(zmax, lnz[k]);
  }
  double tot = 0.0;
  for (std::size_t k = 0; k < m; ++k) tot += (p[k] = std::exp(lnz[k] - zmax));
  for (double& x : p) x /= tot;
  HEState h = from_p_beta(p, beta, sys.spectrum, sys.partition);
  return Subsystem{std::move(label), std::move(sys), std::move(h)};
}

ThreeSystemModel bath_fixture() {
  return ThreeSystemModel{fixture::two_level("A", 0.2, 1e-4), fixture::fix_b_subsystem("J"),
                          fixture::two_level("B", 0.45, 1e-4), 1.0, 1.0, std::nullopt, std::nullopt};
}

double total_energy_rate(std::span<const Subsystem> subs, const std::vector<SubsystemRates>& r) {
  double s = 0.0;
  for (std::size_t j = 0; j < subs.size(); ++j) s += energy_rate(subs[j], r[j]);
  return s;
}

}  // namespace

TEST_SUITE("nh_composite") {
  TEST_CASE("FIX-C potentials and rates") {
    const auto subs = fix_c();
    const NHPotentials p = nh_potentials(subs);
    CHECK(p.v[0] == Approx(golden::fix_c_vA).epsilon(1e-13));
    CHECK(p.v[1] == Approx(golden::fix_c_vB).epsilon(1e-13));
    CHECK(p.v[0] == Approx(fixture::logistic_variance(1.0)).epsilon(1e-13));
    CHECK(p.beta == Approx(golden::fix_c_beta).epsilon(1e-13));
    CHECK(std::fabs(p.beta - 1.34811) <= 5e-4);
    CHECK(p.beta_eff[0] == Approx(1.0).epsilon(1e-12));
    CHECK(p.beta_eff[1] == Approx(2.0).epsilon(1e-12));

    const auto r = nh_rhs(subs);
    CHECK(r[0].dbeta[0] == Approx(golden::fix_c_beta - 1.0).epsilon(1e-12));
    CHECK(r[1].dbeta[0] == Approx(golden::fix_c_beta - 2.0).epsilon(1e-12));
    CHECK(std::fabs(total_energy_rate(subs, r)) <= 1e-10);
    CHECK(energy_rate(subs[0], r[0]) < 0.0);
  }

  TEST_CASE("two-system report on FIX-C") {
    const auto subs = fix_c();
    const TwoSystemReport rep = two_system_report({subs[0], subs[1]});
    CHECK(rep.v_A == Approx(golden::fix_c_vA).epsilon(1e-13));
    CHECK(std::fabs(rep.beta - nh_potentials(subs).beta) <= 1e-14);
    const Flow& f = rep.report.flows.at(0);
    CHECK(f.from == "A");
    CHECK(f.to == "B");
    CHECK(f.energy == Approx(golden::fix_c_flow).epsilon(1e-12));
    CHECK(std::fabs(f.energy - 0.068444) <= 5e-4);
    CHECK(f.entropy == f.energy / f.temperature);
    CHECK(rep.report.total_entropy_production == Approx(golden::fix_c_flow).epsilon(1e-12));
    CHECK(rep.report.energy_flow("B", "A") == -f.energy);
    const double irr = rep.report.irreversibility_of("A") + rep.report.irreversibility_of("B");
    CHECK(irr == Approx(rep.report.total_entropy_production).epsilon(1e-12));

    // Energy leaves A at the rate the report states.
    const auto r = nh_rhs(subs);
    CHECK(-energy_rate(subs[0], r[0]) == Approx(f.energy).epsilon(1e-12));
    const double dS = entropy_rate(subs[0], r[0]) + entropy_rate(subs[1], r[1]);
    CHECK(dS == Approx(rep.report.total_entropy_production).epsilon(1e-10));
  }

  TEST_CASE("two-system limits") {
    const TwoSystemReport same = two_system_report({fixture::two_level("A", 0.7), fixture::two_level("B", 0.7)});
    CHECK(same.report.flows[0].energy == 0.0);
    CHECK(same.report.total_entropy_production == 0.0);

    // Equal conductances: τ_B chosen so v_B = v_A.
    const double tau_B = fixture::logistic_variance(2.0) / fixture::logistic_variance(1.0);
    const TwoSystemReport sym = two_system_report({fixture::two_level("A", 1.0), fixture::two_level("B", 2.0, tau_B)});
    CHECK(sym.beta == Approx(1.5).epsilon(1e-12));

    CHECK(fixture::code_of([] {
            two_system_report({fixture::fix_b_subsystem("A"), fixture::two_level("B", 1.0)});
          }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("general model") {
    // Identical copies.
    const std::vector<Subsystem> twins{fixture::fix_b_subsystem("X"), fixture::fix_b_subsystem("Y")};
    const NHPotentials p = nh_potentials(twins);
    CHECK(p.beta == Approx(p.beta_eff[0]).epsilon(1e-14));
    CHECK(p.beta_eff[0] == Approx(golden::sea_beta).epsilon(1e-12));

    // Two FIX-B copies at different τ exchange energy but conserve the total.
    const std::vector<Subsystem> pair{fixture::fix_b_subsystem("X"), fixture::fix_b_subsystem("Y", {0.3, 2.0})};
    const auto r = nh_rhs(pair);
    CHECK(std::fabs(total_energy_rate(pair, r)) <= 1e-10);
    CHECK(std::fabs(energy_rate(pair[0], r[0])) > 1e-4);

    // Mutually canonical at one β.
    const std::vector<Subsystem> eq{gibbs("X", fixture::fix_b_system(), 0.4), fixture::two_level("Y", 0.4),
                                    gibbs("Z", fixture::fix_b_system({0.5, 3.0}), 0.4)};
    for (const auto& x : nh_rhs(eq)) {
      for (double d : x.dbeta) CHECK(std::fabs(d) <= 1e-12);
      for (double d : x.dalpha) CHECK(std::fabs(d) <= 1e-11);
    }

    CHECK(fixture::code_of([] {
            const std::vector<Subsystem> one{fixture::two_level("A", 1.0)};
            nh_potentials(one);
          }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("independent composite") {
    const std::vector<Subsystem> subs{fixture::fix_b_subsystem("X"), fixture::fix_b_subsystem("Y", {2.0, 0.5})};
    const auto r = independent_composite_step(subs);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::fabs(energy_rate(subs[j], r[j])) <= 1e-12);
      const ReducedRates iso = reduced_rhs(subs[j].state, subs[j].system);
      for (int k = 0; k < 2; ++k) {
        CHECK(r[j].dbeta[k] == iso.dbeta[k]);
        CHECK(r[j].dalpha[k] == iso.dalpha[k]);
      }
    }
  }

  TEST_CASE("three-system potentials on the bath fixture") {
    const ThreeSystemModel m = bath_fixture();
    const ThreeSystemPotentials p = three_system_potentials(m);
    CHECK(p.v_A == Approx(golden::three_vA).epsilon(1e-12));
    CHECK(p.v_B == Approx(golden::three_vB).epsilon(1e-12));
    CHECK(p.v_J == Approx(golden::three_vJ).epsilon(1e-12));
    CHECK(p.omega_A == Approx(1.0).epsilon(1e-14));
    CHECK(p.beta_eff == Approx(golden::sea_beta).epsilon(1e-12));
    CHECK(p.beta_JA == Approx(golden::three_beta_JA).epsilon(1e-12));
    CHECK(p.beta_JB == Approx(golden::three_beta_JB).epsilon(1e-12));
    CHECK(p.beta_AB == Approx(golden::three_beta_AB).epsilon(1e-12));

    const FlowReport f = three_system_flows(m);
    CHECK(f.energy_flow("A", "J") == Approx(golden::three_E_AJ).epsilon(1e-10));
    CHECK(f.energy_flow("J", "B") == Approx(golden::three_E_JB).epsilon(1e-10));
    CHECK(f.energy_flow("J", "A") == -f.energy_flow("A", "J"));

    const ThreeSystemRates r = three_system_rhs(m);
    const double dEA = energy_rate(m.A, r.A), dEJ = energy_rate(m.J, r.J), dEB = energy_rate(m.B, r.B);
    CHECK(std::fabs(dEA + dEJ + dEB) <= 1e-10 * std::max(1.0, std::fabs(dEA)));
    CHECK(-dEA == Approx(f.energy_flow("A", "J")).epsilon(1e-9));
    CHECK(dEB == Approx(f.energy_flow("J", "B")).epsilon(1e-9));

    // Entropy balances close per subsystem.
    const double dSA = entropy_rate(m.A, r.A), dSJ = entropy_rate(m.J, r.J), dSB = entropy_rate(m.B, r.B);
    CHECK(dSA == Approx(-f.entropy_flow("A", "J") + f.irreversibility_of("A")).epsilon(1e-10).scale(1.0));
    CHECK(dSB == Approx(f.entropy_flow("J", "B") + f.irreversibility_of("B")).epsilon(1e-10).scale(1.0));
    CHECK(dSJ == Approx(f.entropy_flow("A", "J") - f.entropy_flow("J", "B") + f.irreversibility_of("J"))
                     .epsilon(1e-10)
                     .scale(1.0));
    for (const auto& [label, v] : f.irreversibility) CHECK(v >= 0.0);
    CHECK(dSA + dSJ + dSB == Approx(f.total_entropy_production).epsilon(1e-10).scale(1.0));
  }

  TEST_CASE("three-system limits") {
    // Triple equilibrium.
    const ThreeSystemModel eq{fixture::two_level("A", 0.6), gibbs("J", fixture::fix_b_system(), 0.6),
                              fixture::two_level("B", 0.6), 1.0, 2.0, std::nullopt, std::nullopt};
    const ThreeSystemPotentials pe = three_system_potentials(eq);
    CHECK(pe.beta_JA == Approx(0.6).epsilon(1e-12));
    CHECK(pe.beta_JB == Approx(0.6).epsilon(1e-12));
    const FlowReport fe = three_system_flows(eq);
    for (const Flow& f : fe.flows) CHECK(std::fabs(f.energy) <= 1e-12);
    CHECK(fe.total_entropy_production <= 1e-20);
    const ThreeSystemRates re = three_system_rhs(eq);
    for (const SubsystemRates* r : {&re.A, &re.J, &re.B}) {
      for (double d : r->dbeta) CHECK(std::fabs(d) <= 1e-10);
    }

    // Very stiff bath A pins β_J^A to β_A.
    const ThreeSystemModel stiff{fixture::two_level("A", 0.2, 1e-6), fixture::fix_b_subsystem("J"),
                                 fixture::two_level("B", 0.45), 1.0, 1.0, std::nullopt, std::nullopt};
    CHECK(std::fabs(three_system_potentials(stiff).beta_JA - 0.2) <= 1e-5);

    // Symmetric baths around β_J^eff = 2.
    const double tau_B = fixture::logistic_variance(3.0) / fixture::logistic_variance(1.0);
    const ThreeSystemModel sym{fixture::two_level("A", 1.0), gibbs("J", fixture::fix_b_system(), 2.0),
                               fixture::two_level("B", 3.0, tau_B), 1.0, 1.0, std::nullopt, std::nullopt};
    const ThreeSystemPotentials ps = three_system_potentials(sym);
    CHECK(ps.v_A == Approx(ps.v_B).epsilon(1e-12));
    CHECK(ps.beta_eff == Approx(2.0).epsilon(1e-12));
    CHECK(ps.beta_JA + ps.beta_JB == Approx(4.0).epsilon(1e-12));
    CHECK(ps.beta_JA < 2.0);

    // β_A < β_J^eff < β_B conducts heat from A through J into B.
    const FlowReport fs = three_system_flows(sym);
    CHECK(fs.energy_flow("A", "J") > 0.0);
    CHECK(fs.energy_flow("J", "B") > 0.0);
  }

  TEST_CASE("decoupled bath B reduces to the A-J model") {
    ThreeSystemModel m = bath_fixture();
    m.A = fixture::two_level("A", 0.2, 0.7);
    m.omega_A = 1.0;
    m.omega_B = 0.0;
    const ThreeSystemRates r3 = three_system_rhs(m);
    const std::vector<Subsystem> aj{m.A, m.J};
    const auto r2 = nh_rhs(aj);
    CHECK(r3.A.dbeta[0] == Approx(r2[0].dbeta[0]).epsilon(1e-13));
    CHECK(r3.A.dalpha[0] == Approx(r2[0].dalpha[0]).epsilon(1e-13));
    for (int k = 0; k < 2; ++k) {
      CHECK(r3.J.dbeta[k] == Approx(r2[1].dbeta[k]).epsilon(1e-13));
      CHECK(r3.J.dalpha[k] == Approx(r2[1].dalpha[k]).epsilon(1e-13));
    }
    CHECK(std::fabs(r3.B.dbeta[0]) <= 1e-14);
  }

  TEST_CASE("steady-state beta") {
    const double bA = 0.2, bB = 0.45;
    CHECK(steady_state_beta(3.0, 5.0, 1e-8, bA, bB) == Approx((bA + bB) / 2).epsilon(1e-6));
    CHECK(steady_state_beta(3.0, 5.0, 1e8, bA, bB) == Approx((3.0 * bA + 5.0 * bB) / 8.0).epsilon(1e-6));
    for (double vJ : {1e-3, 1.0, 1e3}) CHECK(steady_state_beta(2.0, 7.0, vJ, 0.8, 0.8) == Approx(0.8).epsilon(1e-15));
    CHECK(steady_state_beta(golden::three_vA, golden::three_vB, golden::three_vJ, bA, bB) ==
          Approx(golden::three_beta_ss).epsilon(1e-13));
    CHECK(fixture::code_of([] { steady_state_beta(0.0, 1.0, 1.0, 0.1, 0.2); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("FIX-C equalizes") {
    IntegratorConfig c;
    c.t_end = 30.0;
    c.sample_every = 1.0;
    const CompositeTrajectory tr = integrate_composite(fix_c(), CompositeKind::NhTwo, c);
    const CompositeSample& last = tr.samples.back();
    CHECK(std::fabs(last.states[0].beta[0] - last.states[1].beta[0]) <= 1e-6);
    CHECK(last.states[0].beta[0] == Approx(golden::fix_c_final).epsilon(1e-7));
    const double e0 = tr.samples.front().energy;
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const CompositeSample& s = tr.samples[i];
      CHECK(s.entropy_production >= 0.0);
      CHECK(std::fabs(s.energy - e0) <= 1e-8 * std::max(1.0, std::fabs(e0)));
      if (i > 0) CHECK(s.entropy >= tr.samples[i - 1].entropy - 1e-10);
      REQUIRE(s.flows);
      CHECK(s.flows->flows[0].entropy == s.flows->flows[0].energy / s.flows->flows[0].temperature);
    }
  }

  TEST_CASE("independent subsystems settle apart") {
    IntegratorConfig c;
    c.t_end = 40.0;
    std::vector<Subsystem> subs{fixture::fix_b_subsystem("X"), fixture::two_level("Y", 2.0)};
    const double p[] = {0.3, 0.7}, b[] = {0.1, -0.4};
    subs[0].state = from_p_beta(p, b, subs[0].system.spectrum, subs[0].system.partition);
    const CompositeTrajectory tr = integrate_composite(subs, CompositeKind::Independent, c);
    const double eX = total_energy(subs[0].state, subs[0].system.spectrum, subs[0].system.partition);
    const EquilibriumState eqX = equilibrium_state(subs[0].system.spectrum, subs[0].system.partition, eX);
    const auto& last = tr.samples.back();
    CHECK(last.states[0].beta[0] == Approx(eqX.beta).epsilon(1e-6));
    CHECK(last.states[1].beta[0] == Approx(2.0).epsilon(1e-12));
    CHECK(std::fabs(eqX.beta - 2.0) > 0.5);

    // One subsystem alone matches the isolated integrator.
    c.t_end = 5.0;
    const std::vector<Subsystem> solo{fixture::fix_b_subsystem("X")};
    const CompositeTrajectory one = integrate_composite(solo, CompositeKind::Independent, c);
    const Trajectory iso = integrate(solo[0].state, solo[0].system, c);
    for (int k = 0; k < 2; ++k) {
      CHECK(one.samples.back().states[0].beta[k] == Approx(iso.back().state.beta[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("bath fixture reaches the steady state") {
    IntegratorConfig c;
    c.t_end = 30.0;
    c.sample_every = 0.5;
    c.dt_max = 0.5;
    const CompositeTrajectory tr = integrate_three_system(bath_fixture(), c);
    const CompositeSample& last = tr.samples.back();
    REQUIRE(last.three);
    const ThreeSystemPotentials& p = *last.three;
    const double bss = steady_state_beta(p.v_A, p.v_B, p.v_J, last.states[0].beta[0], last.states[2].beta[0]);
    CHECK(std::fabs(p.beta_eff - bss) <= 1e-4);
    CHECK(tr.steady_state_time.has_value());
    for (const CompositeSample& s : tr.samples) {
      for (const auto& [label, v] : s.flows->irreversibility) CHECK(v >= 0.0);
    }
  }
}
