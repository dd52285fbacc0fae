#pragma once

// Raw-pointer kernel signatures shared by every backend. Backends only see
// pointers and lengths so the vectorized translation unit stays free of
// inline standard-library templates.

#include <cstddef>

#include "hesim/kernels.hpp"

namespace hesim::kernels::detail {

struct KernelTable {
  double (*sum_exp_shifted)(const double* x, std::size_t n, double shift);
  void (*exp_affine)(const double* a, const double* b, const double* eps, double* out,
                     std::size_t n);
  void (*neg_log)(const double* p, double scale, double* out, std::size_t n);
  MomentSums (*weighted_sums)(const double* w, const double* eps, const double* s, std::size_t n);
  CentralSums (*centered_sums)(const double* w, const double* eps, const double* s, std::size_t n,
                               double mean_eps, double mean_s);
  MassieuSums (*massieu)(const double* w, const double* eps, const double* s, double a, double b,
                         double* m, std::size_t n);
  void (*triple_product)(const double* x, const double* y, const double* z, double* out,
                         std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the build target has no AVX2 variant.
const KernelTable* avx2_table();

}  // namespace hesim::kernels::detail
