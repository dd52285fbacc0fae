#pragma once

// Canonical (Boltzmann) statistics of one block of levels at a given β.

#include <span>
#include <vector>

namespace hesim::detail {

struct CanonicalStats {
  double lnZ = 0.0;
  double mean = 0.0;      // Σ q ε
  double second = 0.0;    // Σ q ε²
  double variance = 0.0;  // Σ q (ε - mean)²
};

/// q_i = g_i exp(-β ε_i) / Z. `scratch` is resized and left holding q.
CanonicalStats canonical_stats(std::span<const double> energy, std::span<const double> degeneracy,
                               double beta, std::vector<double>& scratch);

/// Solves mean(β) = target on a block with at least two levels. The mean is
/// strictly decreasing in β, so a bracket is grown from [-1, 1] by doubling and
/// the root is polished with Newton steps that fall back to bisection.
/// Throws EnergyOutOfRange when target is not strictly inside (min ε, max ε) and
/// NoConvergence after `max_iter` iterations.
double solve_canonical_beta(std::span<const double> energy, std::span<const double> degeneracy,
                            double target, int max_iter = 200);

}  // namespace hesim::detail
