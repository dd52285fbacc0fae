#pragma once

// Explicit Runge-Kutta integration on a fixed sample grid.

#include <functional>
#include <span>
#include <vector>

namespace hesim {

enum class Method { Rk4Fixed, Rk45Adaptive };
enum class Direction { Forward, Backward };

struct IntegratorConfig {
  Method method = Method::Rk45Adaptive;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double dt_init = 0.0;       // 0 picks τ_min/100
  double dt_max = 0.0;        // 0 picks τ_min
  double t_end = 1.0;         // duration, always positive
  double sample_every = 0.0;  // 0 samples the two endpoints only
  Direction direction = Direction::Forward;
  bool renormalize = false;   // post-step projection back onto Σ p g = 1
  long max_steps = 50'000'000;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

/// Throws InvalidArgument for non-positive tolerances, t_end or negative steps.
void validate(const IntegratorConfig& config);

/// Fills dt_init/dt_max defaults from the smallest relaxation time.
IntegratorConfig resolve_steps(IntegratorConfig config, double tau_min);

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
using OdeObserver = std::function<void(double t, std::span<const double> y)>;
using OdePostStep = std::function<void(std::span<double> y)>;

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_calls = 0;
};

/// Integrates from t0 over config.t_end in the configured direction. The
/// observer sees t0, every grid point t0 ± k*sample_every and the end point;
/// steps are shortened so the grid is hit exactly. Throws StepSizeUnderflow.
OdeStats integrate_ode(const OdeRhs& rhs, std::vector<double> y, double t0,
                       const IntegratorConfig& config, const OdeObserver& observer,
                       const OdePostStep& post_step = {});

}  // namespace hesim
