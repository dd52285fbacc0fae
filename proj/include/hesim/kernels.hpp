#pragma once

// Arithmetic inner loops over per-level arrays.
//
// Every kernel has a scalar reference implementation and, on x86-64 hosts with
// AVX2+FMA, a vectorized variant. The active backend is chosen once at startup
// from the CPU features; HESIM_KERNELS=scalar in the environment forces the
// reference path. All reductions use compensated summation.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hesim::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);
bool backend_supported(Backend b);
std::vector<Backend> supported_backends();
Backend active_backend();
/// Throws hesim::Error(InvalidArgument) when the CPU lacks the backend.
void set_backend(Backend b);

/// Raw weighted sums Σw, Σwε, Σws, Σwε², Σwsε.
struct MomentSums {
  double w = 0.0;
  double we = 0.0;
  double ws = 0.0;
  double wee = 0.0;
  double wse = 0.0;
};

/// Σw(ε-me)², Σw(s-ms)(ε-me), Σw(s-ms)².
struct CentralSums {
  double ee = 0.0;
  double se = 0.0;
  double ss = 0.0;
};

/// Σwm, Σwmε, Σwm².
struct MassieuSums {
  double wm = 0.0;
  double wme = 0.0;
  double wmm = 0.0;
};

/// Σ exp(x_i - shift).
double sum_exp_shifted(std::span<const double> x, double shift);

/// out_i = exp(-a_i - b_i*eps_i).
void exp_affine(std::span<const double> a, std::span<const double> b, std::span<const double> eps,
                std::span<double> out);

/// out_i = -scale*ln(p_i) for p_i > 0, and 0 for p_i <= 0.
void neg_log(std::span<const double> p, double scale, std::span<double> out);

MomentSums weighted_sums(std::span<const double> w, std::span<const double> eps,
                         std::span<const double> s);

CentralSums centered_sums(std::span<const double> w, std::span<const double> eps,
                          std::span<const double> s, double mean_eps, double mean_s);

/// Writes m_i = s_i - a - b*eps_i and returns the w-weighted sums of m, mε, m².
MassieuSums massieu(std::span<const double> w, std::span<const double> eps,
                    std::span<const double> s, double a, double b, std::span<double> m);

/// out_i = x_i*y_i*z_i.
void triple_product(std::span<const double> x, std::span<const double> y,
                    std::span<const double> z, std::span<double> out);

/// Σ x_i*y_i.
double dot(std::span<const double> x, std::span<const double> y);

}  // namespace hesim::kernels
