#include <doctest.h>

#include <cmath>
#include <vector>

#include "common.hpp"
#include "hesim/ode.hpp"

using namespace hesim;
using doctest::Approx;

namespace {

struct Recorder {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  OdeObserver observer() {
    return [this](double tt, std::span<const double> yy) {
      t.push_back(tt);
      y.emplace_back(yy.begin(), yy.end());
    };
  }
};

// y0' = -y0, y1' = -2 y1.
void decay(double, std::span<const double> y, std::span<double> d) {
  d[0] = -y[0];
  d[1] = -2.0 * y[1];
}

}  // namespace

TEST_SUITE("ode") {
  TEST_CASE("adaptive decay hits the sample grid") {
    IntegratorConfig c;
    c.t_end = 3.0;
    c.sample_every = 0.25;
    c.dt_init = 0.01;
    c.dt_max = 1.0;
    Recorder r;
    const OdeStats st = integrate_ode(decay, {1.0, 1.0}, 0.0, c, r.observer());
    REQUIRE(r.t.size() == 13);
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      CHECK(r.t[k] == 0.25 * static_cast<double>(k));
      CHECK(r.y[k][0] == Approx(std::exp(-r.t[k])).epsilon(1e-8));
      CHECK(r.y[k][1] == Approx(std::exp(-2.0 * r.t[k])).epsilon(1e-8));
    }
    CHECK(st.accepted > 0);
    CHECK(st.rhs_calls >= 6 * st.accepted);
  }

  TEST_CASE("endpoints only when the grid is off") {
    IntegratorConfig c;
    c.t_end = 0.7;
    c.dt_init = 0.01;
    c.dt_max = 1.0;
    Recorder r;
    integrate_ode(decay, {2.0, 1.0}, 5.0, c, r.observer());
    REQUIRE(r.t.size() == 2);
    CHECK(r.t[0] == 5.0);
    CHECK(r.t[1] == 5.7);
    CHECK(r.y[1][0] == Approx(2.0 * std::exp(-0.7)).epsilon(1e-8));
  }

  TEST_CASE("uneven final interval") {
    IntegratorConfig c;
    c.t_end = 1.0;
    c.sample_every = 0.3;
    c.dt_init = 0.01;
    c.dt_max = 1.0;
    Recorder r;
    integrate_ode(decay, {1.0, 1.0}, 0.0, c, r.observer());
    REQUIRE(r.t.size() == 5);
    CHECK(r.t[3] == Approx(0.9).epsilon(1e-15));
    CHECK(r.t[4] == 1.0);
  }

  TEST_CASE("backward direction") {
    IntegratorConfig c;
    c.t_end = 2.0;
    c.sample_every = 0.5;
    c.dt_init = 0.01;
    c.dt_max = 1.0;
    c.direction = Direction::Backward;
    Recorder r;
    integrate_ode(decay, {1.0, 1.0}, 0.0, c, r.observer());
    REQUIRE(r.t.size() == 5);
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      CHECK(r.t[k] == -0.5 * static_cast<double>(k));
      CHECK(r.y[k][0] == Approx(std::exp(-r.t[k])).epsilon(1e-8));
    }

    // Forward then backward returns to the start.
    c.direction = Direction::Forward;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-14;
    Recorder f;
    integrate_ode(decay, {1.0, 1.0}, 0.0, c, f.observer());
    c.direction = Direction::Backward;
    Recorder b;
    integrate_ode(decay, f.y.back(), f.t.back(), c, b.observer());
    CHECK(b.t.back() == Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(b.y.back()[0] == Approx(1.0).epsilon(1e-10));
    CHECK(b.y.back()[1] == Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("fixed-step RK4 converges at fourth order") {
    IntegratorConfig c;
    c.method = Method::Rk4Fixed;
    c.t_end = 1.0;
    double err[2];
    for (int k = 0; k < 2; ++k) {
      c.dt_init = k == 0 ? 0.02 : 0.01;
      c.dt_max = c.dt_init;
      Recorder r;
      integrate_ode(decay, {1.0, 1.0}, 0.0, c, r.observer());
      err[k] = std::fabs(r.y.back()[1] - std::exp(-2.0));
    }
    CHECK(err[0] / err[1] == Approx(16.0).epsilon(0.03));
  }

  TEST_CASE("post-step hook") {
    IntegratorConfig c;
    c.t_end = 1.0;
    c.dt_init = 0.1;
    c.dt_max = 0.1;
    int calls = 0;
    Recorder r;
    integrate_ode(decay, {1.0, 1.0}, 0.0, c, r.observer(), [&](std::span<double> y) {
      ++calls;
      y[1] = 1.0;
    });
    CHECK(calls > 0);
    CHECK(r.y.back()[1] == 1.0);
  }

  TEST_CASE("finite-time blow-up underflows the step") {
    IntegratorConfig c;
    c.t_end = 2.0;
    c.dt_init = 0.01;
    c.dt_max = 0.1;
    const OdeRhs square = [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; };
    CHECK(fixture::code_of([&] { integrate_ode(square, {1.0}, 0.0, c, {}); }) ==
          ErrorCode::StepSizeUnderflow);
  }

  TEST_CASE("config validation") {
    IntegratorConfig c;
    c.rel_tol = 0.0;
    CHECK(fixture::code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
    c = {};
    c.t_end = -1.0;
    CHECK(fixture::code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
    c = {};
    c.sample_every = -0.1;
    CHECK(fixture::code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);

    const IntegratorConfig r = resolve_steps({}, 0.5);
    CHECK(r.dt_init == Approx(0.005));
    CHECK(r.dt_max == Approx(0.5));
  }
}
