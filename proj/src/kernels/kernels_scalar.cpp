// Reference implementations. These define the semantics the vectorized
// variants are tested against.

#include <cmath>

#include "hesim/detail/compensated.hpp"
#include "kernels/kernel_table.hpp"

namespace hesim::kernels::detail {
namespace {

using hesim::detail::CompensatedSum;

double sum_exp_shifted(const double* x, std::size_t n, double shift) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(x[i] - shift);
  return acc.value();
}

void exp_affine(const double* a, const double* b, const double* eps, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(-a[i] - b[i] * eps[i]);
}

void neg_log(const double* p, double scale, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = p[i] > 0.0 ? -scale * std::log(p[i]) : 0.0;
}

MomentSums weighted_sums(const double* w, const double* eps, const double* s, std::size_t n) {
  CompensatedSum sw, swe, sws, swee, swse;
  for (std::size_t i = 0; i < n; ++i) {
    const double we = w[i] * eps[i];
    sw += w[i];
    swe += we;
    sws += w[i] * s[i];
    swee += we * eps[i];
    swse += we * s[i];
  }
  return {sw.value(), swe.value(), sws.value(), swee.value(), swse.value()};
}

CentralSums centered_sums(const double* w, const double* eps, const double* s, std::size_t n,
                          double mean_eps, double mean_s) {
  CompensatedSum ee, se, ss;
  for (std::size_t i = 0; i < n; ++i) {
    const double de = eps[i] - mean_eps;
    const double ds = s[i] - mean_s;
    ee += w[i] * de * de;
    se += w[i] * ds * de;
    ss += w[i] * ds * ds;
  }
  return {ee.value(), se.value(), ss.value()};
}

MassieuSums massieu(const double* w, const double* eps, const double* s, double a, double b,
                    double* m, std::size_t n) {
  CompensatedSum wm, wme, wmm;
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = s[i] - a - b * eps[i];
    m[i] = mi;
    const double x = w[i] * mi;
    wm += x;
    wme += x * eps[i];
    wmm += x * mi;
  }
  return {wm.value(), wme.value(), wmm.value()};
}

void triple_product(const double* x, const double* y, const double* z, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i] * z[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc.value();
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{sum_exp_shifted, exp_affine, neg_log, weighted_sums,
                                 centered_sums,   massieu,    triple_product, dot};
  return table;
}

}  // namespace hesim::kernels::detail
