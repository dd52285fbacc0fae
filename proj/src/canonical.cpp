#include "canonical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"
#include "hesim/kernels.hpp"

namespace hesim::detail {

CanonicalStats canonical_stats(std::span<const double> energy, std::span<const double> degeneracy,
                               double beta, std::vector<double>& scratch) {
  const std::size_t n = energy.size();
  scratch.resize(n);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    scratch[i] = std::log(degeneracy[i]) - beta * energy[i];
    shift = std::max(shift, scratch[i]);
  }
  CompensatedSum z;
  for (std::size_t i = 0; i < n; ++i) {
    scratch[i] = std::exp(scratch[i] - shift);
    z += scratch[i];
  }
  const double zsum = z.value();
  for (std::size_t i = 0; i < n; ++i) scratch[i] /= zsum;

  CanonicalStats out;
  out.lnZ = shift + std::log(zsum);
  out.mean = kernels::dot(scratch, energy);
  const auto c = kernels::centered_sums(scratch, energy, energy, out.mean, out.mean);
  out.variance = c.ee;
  out.second = out.variance + out.mean * out.mean;
  return out;
}

double solve_canonical_beta(std::span<const double> energy, std::span<const double> degeneracy,
                            double target, int max_iter) {
  const auto [lo_it, hi_it] = std::minmax_element(energy.begin(), energy.end());
  if (energy.size() < 2 || !(target > *lo_it && target < *hi_it)) {
    throw Error(ErrorCode::EnergyOutOfRange,
                "target mean energy " + std::to_string(target) +
                    " is not strictly inside the spectral range of the block");
  }
  const double tol = 1e-12 * std::max(1.0, std::fabs(target));
  std::vector<double> q;
  auto residual = [&](double b) { return canonical_stats(energy, degeneracy, b, q).mean - target; };

  double b = 1.0;
  while (!(residual(-b) > 0.0 && residual(b) < 0.0)) {
    b *= 2.0;
    if (b > 1e300) throw Error(ErrorCode::NoConvergence, "could not bracket the inverse temperature");
  }
  double lo = -b;  // residual(lo) > 0
  double hi = b;   // residual(hi) < 0

  double beta = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const CanonicalStats st = canonical_stats(energy, degeneracy, beta, q);
    const double f = st.mean - target;
    if (std::fabs(f) <= tol) return beta;
    if (f > 0.0) {
      lo = beta;
    } else {
      hi = beta;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(beta))) {
      return beta;
    }
    double next = st.variance > 0.0 ? beta + f / st.variance : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    beta = next;
  }
  throw Error(ErrorCode::NoConvergence,
              "inverse temperature solve did not converge in " + std::to_string(max_iter) +
                  " iterations");
}

}  // namespace hesim::detail
