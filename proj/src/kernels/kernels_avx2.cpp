// AVX2+FMA variants. Functions carry the target attribute instead of the whole
// file being built with -mavx2, so nothing here can leak vector instructions
// into code that runs before dispatch.

#include "kernels/kernel_table.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))

#include <immintrin.h>

#include <cfloat>
#include <cmath>

#define HESIM_AVX2 __attribute__((target("avx2,fma")))

namespace hesim::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

// Lane-wise Neumaier accumulator.
struct VecSum {
  __m256d sum;
  __m256d comp;
};

HESIM_AVX2 inline VecSum vsum_zero() { return {_mm256_setzero_pd(), _mm256_setzero_pd()}; }

HESIM_AVX2 inline __m256d vabs(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

HESIM_AVX2 inline void vsum_add(VecSum& acc, __m256d x) {
  const __m256d t = _mm256_add_pd(acc.sum, x);
  const __m256d big_sum = _mm256_cmp_pd(vabs(acc.sum), vabs(x), _CMP_GE_OQ);
  const __m256d c_sum = _mm256_add_pd(_mm256_sub_pd(acc.sum, t), x);
  const __m256d c_x = _mm256_add_pd(_mm256_sub_pd(x, t), acc.sum);
  acc.comp = _mm256_add_pd(acc.comp, _mm256_blendv_pd(c_x, c_sum, big_sum));
  acc.sum = t;
}

// Scalar Neumaier step used to fold lanes and tails.
struct ScalarSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

HESIM_AVX2 inline void fold(const VecSum& v, ScalarSum& out) {
  alignas(32) double s[kLanes];
  alignas(32) double c[kLanes];
  _mm256_store_pd(s, v.sum);
  _mm256_store_pd(c, v.comp);
  for (std::size_t l = 0; l < kLanes; ++l) out.add(s[l]);
  for (std::size_t l = 0; l < kLanes; ++l) out.add(c[l]);
}

// exp on [-708.39, 709]; below the range returns 0, above clamps.
HESIM_AVX2 inline __m256d vexp(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.3964185322641);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  // Taylor polynomial of degree 13 on |r| <= ln2/2.
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // 2^n built directly in the exponent field.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

// Natural log for positive normal inputs.
HESIM_AVX2 inline __m256d vlog(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  const __m256i two52_bits = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d biased = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(bits, 52), two52_bits)),
      _mm256_set1_pd(4503599627370496.0));
  __m256d e = _mm256_sub_pd(biased, _mm256_set1_pd(1023.0));

  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(f, _mm256_set1_pd(2.0)));
  const __m256d z = _mm256_mul_pd(s, s);

  // 2*atanh(s) = 2s * sum z^k/(2k+1), k = 0..10.
  __m256d p = _mm256_set1_pd(1.0 / 21.0);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 3.0));
  // 2s + 2s*z*p' keeps the leading term exact.
  const __m256d two_s = _mm256_add_pd(s, s);
  const __m256d tail = _mm256_mul_pd(_mm256_mul_pd(two_s, z), p);

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d low = _mm256_fmadd_pd(e, ln2_lo, tail);
  return _mm256_fmadd_pd(e, ln2_hi, _mm256_add_pd(two_s, low));
}

HESIM_AVX2 double sum_exp_shifted(const double* x, std::size_t n, double shift) {
  VecSum acc = vsum_zero();
  const __m256d vs = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vsum_add(acc, vexp(_mm256_sub_pd(_mm256_loadu_pd(x + i), vs)));
  }
  ScalarSum out;
  fold(acc, out);
  for (; i < n; ++i) out.add(std::exp(x[i] - shift));
  return out.value();
}

HESIM_AVX2 void exp_affine(const double* a, const double* b, const double* eps, double* out,
                           std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d arg = _mm256_fnmadd_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(eps + i),
                                         _mm256_sub_pd(_mm256_setzero_pd(), _mm256_loadu_pd(a + i)));
    _mm256_storeu_pd(out + i, vexp(arg));
  }
  for (; i < n; ++i) out[i] = std::exp(-a[i] - b[i] * eps[i]);
}

HESIM_AVX2 void neg_log(const double* p, double scale, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d tiny = _mm256_set1_pd(DBL_MIN);
  const __m256d vscale = _mm256_set1_pd(-scale);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(p + i);
    const __m256d positive = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    const __m256d subnormal = _mm256_and_pd(positive, _mm256_cmp_pd(v, tiny, _CMP_LT_OQ));
    const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), v, positive);
    _mm256_storeu_pd(out + i, _mm256_and_pd(positive, _mm256_mul_pd(vscale, vlog(safe))));
    if (_mm256_movemask_pd(subnormal) != 0) {
      for (std::size_t l = 0; l < kLanes; ++l) {
        if (p[i + l] > 0.0 && p[i + l] < DBL_MIN) out[i + l] = -scale * std::log(p[i + l]);
      }
    }
  }
  for (; i < n; ++i) out[i] = p[i] > 0.0 ? -scale * std::log(p[i]) : 0.0;
}

HESIM_AVX2 MomentSums weighted_sums(const double* w, const double* eps, const double* s,
                                    std::size_t n) {
  VecSum sw = vsum_zero(), swe = vsum_zero(), sws = vsum_zero(), swee = vsum_zero(),
         swse = vsum_zero();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    const __m256d ve = _mm256_loadu_pd(eps + i);
    const __m256d vs = _mm256_loadu_pd(s + i);
    const __m256d we = _mm256_mul_pd(vw, ve);
    vsum_add(sw, vw);
    vsum_add(swe, we);
    vsum_add(sws, _mm256_mul_pd(vw, vs));
    vsum_add(swee, _mm256_mul_pd(we, ve));
    vsum_add(swse, _mm256_mul_pd(we, vs));
  }
  ScalarSum a, b, c, d, e;
  fold(sw, a);
  fold(swe, b);
  fold(sws, c);
  fold(swee, d);
  fold(swse, e);
  for (; i < n; ++i) {
    const double we = w[i] * eps[i];
    a.add(w[i]);
    b.add(we);
    c.add(w[i] * s[i]);
    d.add(we * eps[i]);
    e.add(we * s[i]);
  }
  return {a.value(), b.value(), c.value(), d.value(), e.value()};
}

HESIM_AVX2 CentralSums centered_sums(const double* w, const double* eps, const double* s,
                                     std::size_t n, double mean_eps, double mean_s) {
  VecSum ee = vsum_zero(), se = vsum_zero(), ss = vsum_zero();
  const __m256d me = _mm256_set1_pd(mean_eps);
  const __m256d ms = _mm256_set1_pd(mean_s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    const __m256d de = _mm256_sub_pd(_mm256_loadu_pd(eps + i), me);
    const __m256d ds = _mm256_sub_pd(_mm256_loadu_pd(s + i), ms);
    vsum_add(ee, _mm256_mul_pd(_mm256_mul_pd(vw, de), de));
    vsum_add(se, _mm256_mul_pd(_mm256_mul_pd(vw, ds), de));
    vsum_add(ss, _mm256_mul_pd(_mm256_mul_pd(vw, ds), ds));
  }
  ScalarSum a, b, c;
  fold(ee, a);
  fold(se, b);
  fold(ss, c);
  for (; i < n; ++i) {
    const double de = eps[i] - mean_eps;
    const double ds = s[i] - mean_s;
    a.add(w[i] * de * de);
    b.add(w[i] * ds * de);
    c.add(w[i] * ds * ds);
  }
  return {a.value(), b.value(), c.value()};
}

HESIM_AVX2 MassieuSums massieu(const double* w, const double* eps, const double* s, double a,
                               double b, double* m, std::size_t n) {
  VecSum wm = vsum_zero(), wme = vsum_zero(), wmm = vsum_zero();
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d ve = _mm256_loadu_pd(eps + i);
    // s - a - b*eps, evaluated in the same order as the reference
    const __m256d mi = _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(s + i), va),
                                     _mm256_mul_pd(vb, ve));
    _mm256_storeu_pd(m + i, mi);
    const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(w + i), mi);
    vsum_add(wm, x);
    vsum_add(wme, _mm256_mul_pd(x, ve));
    vsum_add(wmm, _mm256_mul_pd(x, mi));
  }
  ScalarSum r0, r1, r2;
  fold(wm, r0);
  fold(wme, r1);
  fold(wmm, r2);
  for (; i < n; ++i) {
    const double mi = s[i] - a - b * eps[i];
    m[i] = mi;
    const double x = w[i] * mi;
    r0.add(x);
    r1.add(x * eps[i]);
    r2.add(x * mi);
  }
  return {r0.value(), r1.value(), r2.value()};
}

HESIM_AVX2 void triple_product(const double* x, const double* y, const double* z, double* out,
                               std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(xy, _mm256_loadu_pd(z + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i] * z[i];
}

HESIM_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  VecSum acc = vsum_zero();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vsum_add(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  ScalarSum out;
  fold(acc, out);
  for (; i < n; ++i) out.add(x[i] * y[i]);
  return out.value();
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{sum_exp_shifted, exp_affine, neg_log, weighted_sums,
                                 centered_sums,   massieu,    triple_product, dot};
  return &table;
}

}  // namespace hesim::kernels::detail

#else

namespace hesim::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace hesim::kernels::detail

#endif
