#include "hesim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hesim/error.hpp"

namespace hesim {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Sample grid t0 + dir*k*h, with the end point always last.
class Grid {
 public:
  Grid(double t0, double dir, double t_end, double every)
      : t0_(t0), dir_(dir), t_end_(t_end), every_(every) {
    count_ = every > 0.0 ? static_cast<long>(std::floor(t_end / every * (1.0 + 1e-12))) : 0;
    // Drop a grid point that would sit on top of the end point.
    if (count_ > 0 && t_end - count_ * every <= 1e-12 * t_end) --count_;
  }
  // k = 1..count_ are interior grid points; count_+1 is the end.
  long size() const { return count_ + 1; }
  double at(long k) const {
    if (k > count_) return t0_ + dir_ * t_end_;
    return t0_ + dir_ * static_cast<double>(k) * every_;
  }

 private:
  double t0_, dir_, t_end_, every_;
  long count_ = 0;
};

void underflow(double t, double h) {
  throw Error(ErrorCode::StepSizeUnderflow,
              "step size " + std::to_string(h) + " underflowed at t = " + std::to_string(t));
}

}  // namespace

void validate(const IntegratorConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(c.rel_tol > 0.0)) bad("rel_tol must be positive");
  if (!(c.abs_tol > 0.0)) bad("abs_tol must be positive");
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) bad("t_end must be positive");
  if (c.dt_init < 0.0 || !std::isfinite(c.dt_init)) bad("dt_init must be non-negative");
  if (c.dt_max < 0.0 || !std::isfinite(c.dt_max)) bad("dt_max must be non-negative");
  if (c.sample_every < 0.0 || !std::isfinite(c.sample_every)) bad("sample_every must be non-negative");
  if (c.max_steps <= 0) bad("max_steps must be positive");
}

IntegratorConfig resolve_steps(IntegratorConfig config, double tau_min) {
  if (config.dt_init == 0.0) config.dt_init = tau_min / 100.0;
  if (config.dt_max == 0.0) config.dt_max = tau_min;
  config.dt_init = std::min(config.dt_init, config.dt_max);
  return config;
}

OdeStats integrate_ode(const OdeRhs& rhs, std::vector<double> y, double t0,
                       const IntegratorConfig& config, const OdeObserver& observer,
                       const OdePostStep& post_step) {
  validate(config);
  if (config.dt_init <= 0.0 || config.dt_max <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "integrate_ode needs resolved step sizes");
  }
  const double dir = config.direction == Direction::Forward ? 1.0 : -1.0;
  const std::size_t n = y.size();
  const Grid grid(t0, dir, config.t_end, config.sample_every);

  OdeStats stats;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  auto eval = [&](double t, const std::vector<double>& x, std::vector<double>& out) {
    rhs(t, x, out);
    ++stats.rhs_calls;
  };

  double t = t0;
  if (observer) observer(t, y);
  eval(t, y, k1);
  double h = std::min(config.dt_init, config.dt_max);
  const double eps = std::numeric_limits<double>::epsilon();

  for (long target_index = 1; target_index <= grid.size(); ++target_index) {
    const double target = grid.at(target_index);
    while (dir * (target - t) > 0.0) {
      if (stats.accepted + stats.rejected >= config.max_steps) {
        throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted at t = " + std::to_string(t));
      }
      const double remaining = dir * (target - t);
      bool last = false;
      double step = std::min(h, config.dt_max);
      if (step >= remaining * (1.0 - 1e-12)) {
        step = remaining;
        last = true;
      }
      if (step < 10.0 * eps * std::max(1.0, std::fabs(t))) underflow(t, step);
      const double hs = dir * step;

      if (config.method == Method::Rk4Fixed) {
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * hs * k1[i];
        eval(t + 0.5 * hs, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * hs * k2[i];
        eval(t + 0.5 * hs, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * k3[i];
        eval(t + hs, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
          y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = last ? target : t + hs;
        if (post_step) post_step(y);
        eval(t, y, k1);
        ++stats.accepted;
        continue;
      }

      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
      eval(t + c2 * hs, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      eval(t + c3 * hs, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      }
      eval(t + c4 * hs, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      }
      eval(t + c5 * hs, tmp, k5);
      for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      eval(t + hs, tmp, k6);
      for (std::size_t i = 0; i < n; ++i) {
        ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      }

      double err = std::numeric_limits<double>::infinity();
      if (all_finite(ynew)) {
        eval(t + hs, ynew, k7);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                 e7 * k7[i]);
          const double sc =
              config.abs_tol + config.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
          acc += (e / sc) * (e / sc);
        }
        err = n > 0 ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
        if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
      }

      if (err <= 1.0) {
        y.swap(ynew);
        t = last ? target : t + hs;
        ++stats.accepted;
        if (post_step) {
          post_step(y);
          eval(t, y, k1);
        } else {
          k1.swap(k7);
        }
        const double factor =
            err == 0.0 ? kMaxFactor : std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor);
        // A step shortened to land on the grid says nothing about the natural step.
        h = last ? std::max(h, step * factor) : step * factor;
      } else {
        ++stats.rejected;
        const double factor =
            std::isfinite(err) ? std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, 1.0)
                               : kMinFactor;
        h = step * factor;
      }
    }
    if (observer) observer(t, y);
  }
  return stats;
}

}  // namespace hesim
