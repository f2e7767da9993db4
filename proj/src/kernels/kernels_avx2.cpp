#include <immintrin.h>

#include "primitives.hpp"

// AVX2 variants. Four philox blocks per iteration (64-bit lanes each holding
// one 32-bit counter word), eight stream columns per pass. Every floating
// step copies the scalar reference operation for operation so outputs are
// bit-identical; remainders fall back to the scalar span.

namespace lpsketch::kernels::detail {

namespace {

const __m256i kM0 = _mm256_set1_epi64x(0xD2511F53ll);
const __m256i kM1 = _mm256_set1_epi64x(0xCD9E8D57ll);
const __m256i kMask32 = _mm256_set1_epi64x(0xFFFFFFFFll);

struct PhiloxState4 {
  __m256i k0[10];
  __m256i k1[10];

  explicit PhiloxState4(std::uint64_t key) {
    std::uint32_t a = static_cast<std::uint32_t>(key);
    std::uint32_t b = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
      k0[r] = _mm256_set1_epi64x(static_cast<long long>(a));
      k1[r] = _mm256_set1_epi64x(static_cast<long long>(b));
      a += kPhiloxW0;
      b += kPhiloxW1;
    }
  }
};

// Runs the 10 rounds on four blocks; counters come in as 32-bit values in
// 64-bit lanes. On return c0..c3 hold the output words.
inline void philox4(const PhiloxState4& ks, __m256i& c0, __m256i& c1, __m256i& c2, __m256i& c3) {
  for (int r = 0; r < 10; ++r) {
    __m256i p0 = _mm256_mul_epu32(c0, kM0);
    __m256i p1 = _mm256_mul_epu32(c2, kM1);
    __m256i hi0 = _mm256_srli_epi64(p0, 32);
    __m256i lo0 = _mm256_and_si256(p0, kMask32);
    __m256i hi1 = _mm256_srli_epi64(p1, 32);
    __m256i lo1 = _mm256_and_si256(p1, kMask32);
    c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), ks.k0[r]);
    c1 = lo1;
    c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), ks.k1[r]);
    c3 = lo0;
  }
}

// Exact u64 -> double for v < 2^53: split at bit 32, reassemble through the
// 2^52 / 2^84 magic representations. Both partial values and their sum are
// exactly representable, matching the scalar's exact conversion.
inline __m256d u64_to_double(__m256i v) {
  const __m256i hi_magic = _mm256_castpd_si256(_mm256_set1_pd(0x1p84));
  const __m256i lo_magic = _mm256_castpd_si256(_mm256_set1_pd(0x1p52));
  const __m256d corr = _mm256_set1_pd(0x1.00000001p84);  // 2^84 + 2^52
  __m256i xh = _mm256_or_si256(_mm256_srli_epi64(v, 32), hi_magic);
  __m256i xl = _mm256_or_si256(_mm256_and_si256(v, kMask32), lo_magic);
  __m256d dh = _mm256_sub_pd(_mm256_castsi256_pd(xh), corr);
  return _mm256_add_pd(dh, _mm256_castsi256_pd(xl));
}

inline __m256d unit_from_u64(__m256i u) {
  __m256i v = _mm256_or_si256(_mm256_srli_epi64(u, 11), _mm256_set1_epi64x(1));
  return _mm256_mul_pd(u64_to_double(v), _mm256_set1_pd(0x1p-53));
}

inline __m256d horner8(const double* c, __m256d r) {
  __m256d acc = _mm256_set1_pd(c[7]);
  for (int i = 6; i >= 0; --i) acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[i]));
  return acc;
}

inline __m256d det_log4(__m256d x) {
  const __m256i mant_mask = _mm256_set1_epi64x(0xFFFFFFFFFFFFFll);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000ll);
  const __m256i exp_magic = _mm256_castpd_si256(_mm256_set1_pd(0x1p52));
  __m256i ix = _mm256_castpd_si256(x);
  __m256i ebits = _mm256_srli_epi64(ix, 52);
  __m256d eraw =
      _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(ebits, exp_magic)), _mm256_set1_pd(0x1p52));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(ix, mant_mask), one_bits));
  __m256d e = _mm256_sub_pd(eraw, _mm256_set1_pd(1023.0));
  __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_blendv_pd(e, _mm256_add_pd(e, _mm256_set1_pd(1.0)), big);
  __m256d zm1 = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  __m256d zp1 = _mm256_add_pd(m, _mm256_set1_pd(1.0));
  __m256d z = _mm256_div_pd(zm1, zp1);
  __m256d w = _mm256_mul_pd(z, z);
  __m256d poly = _mm256_set1_pd(kLogC[10]);
  for (int i = 9; i >= 0; --i) poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(kLogC[i]));
  __m256d z2 = _mm256_add_pd(z, z);
  __m256d logm = _mm256_mul_pd(z2, poly);
  __m256d t1 = _mm256_mul_pd(e, _mm256_set1_pd(kLn2Hi));
  __m256d t2 = _mm256_add_pd(t1, logm);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), t2);
}

// Returns the quantiles of four uniforms; lanes whose tail radius exceeds 5
// (far tail, needs the third rational) are flagged in far_mask for a scalar
// fixup by the caller.
inline __m256d normal_quantile4(__m256d u, int& far_mask) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d q = _mm256_sub_pd(u, half);
  __m256d aq = _mm256_andnot_pd(sign, q);
  __m256d central = _mm256_cmp_pd(aq, _mm256_set1_pd(0.425), _CMP_LE_OQ);

  __m256d t = _mm256_mul_pd(q, q);
  __m256d r = _mm256_sub_pd(_mm256_set1_pd(0.180625), t);
  __m256d zc = _mm256_mul_pd(q, _mm256_div_pd(horner8(kQA, r), horner8(kQB, r)));

  int cm = _mm256_movemask_pd(central);
  far_mask = 0;
  if (cm == 0xF) return zc;

  __m256d om = _mm256_sub_pd(_mm256_set1_pd(1.0), u);
  __m256d ps = _mm256_min_pd(u, om);
  __m256d nl = _mm256_xor_pd(det_log4(ps), sign);
  __m256d rt = _mm256_sqrt_pd(nl);
  __m256d mid = _mm256_cmp_pd(rt, _mm256_set1_pd(5.0), _CMP_LE_OQ);
  __m256d s = _mm256_sub_pd(rt, _mm256_set1_pd(1.6));
  __m256d zt = _mm256_div_pd(horner8(kQC, s), horner8(kQD, s));
  __m256d neg = _mm256_cmp_pd(q, _mm256_setzero_pd(), _CMP_LT_OQ);
  zt = _mm256_blendv_pd(zt, _mm256_xor_pd(zt, sign), neg);
  far_mask = _mm256_movemask_pd(_mm256_andnot_pd(mid, _mm256_andnot_pd(central, _mm256_castsi256_pd(_mm256_set1_epi64x(-1)))));
  return _mm256_blendv_pd(zt, zc, central);
}

void fill_normal_avx2(std::uint64_t key, std::uint64_t row, std::uint32_t n, double* out) {
  PhiloxState4 ks(key);
  const __m256i c0v = _mm256_set1_epi64x(static_cast<long long>(static_cast<std::uint32_t>(row)));
  const __m256i c1v =
      _mm256_set1_epi64x(static_cast<long long>(static_cast<std::uint32_t>(row >> 32)));
  const __m256i lane = _mm256_setr_epi64x(0, 1, 2, 3);
  std::uint32_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256i c0 = c0v, c1 = c1v, c3 = _mm256_setzero_si256();
    __m256i c2 = _mm256_add_epi64(_mm256_set1_epi64x(j >> 1), lane);
    philox4(ks, c0, c1, c2, c3);
    __m256i ua = _mm256_or_si256(_mm256_slli_epi64(c0, 32), c1);
    __m256i ub = _mm256_or_si256(_mm256_slli_epi64(c2, 32), c3);
    int fa = 0, fb = 0;
    __m256d za = normal_quantile4(unit_from_u64(ua), fa);
    __m256d zb = normal_quantile4(unit_from_u64(ub), fb);
    __m256d ilo = _mm256_unpacklo_pd(za, zb);
    __m256d ihi = _mm256_unpackhi_pd(za, zb);
    _mm256_storeu_pd(out + j, _mm256_permute2f128_pd(ilo, ihi, 0x20));
    _mm256_storeu_pd(out + j + 4, _mm256_permute2f128_pd(ilo, ihi, 0x31));
    if (fa | fb) {
      for (int l = 0; l < 4; ++l) {
        if (fa & (1 << l)) {
          std::uint32_t col = j + 2 * l;
          out[col] = normal_quantile_impl(unit_double_impl(stream_u64_impl(key, row, col)));
        }
        if (fb & (1 << l)) {
          std::uint32_t col = j + 2 * l + 1;
          out[col] = normal_quantile_impl(unit_double_impl(stream_u64_impl(key, row, col)));
        }
      }
    }
  }
  fill_normal_span(key, row, j, n, out);
}

void fill_three_point_avx2(std::uint64_t key, std::uint64_t row, std::uint32_t n,
                           const ThreePointParams& tp, double* out) {
  PhiloxState4 ks(key);
  const __m256i c0v = _mm256_set1_epi64x(static_cast<long long>(static_cast<std::uint32_t>(row)));
  const __m256i c1v =
      _mm256_set1_epi64x(static_cast<long long>(static_cast<std::uint32_t>(row >> 32)));
  const __m256i lane = _mm256_setr_epi64x(0, 1, 2, 3);
  const __m256d lo_thr = _mm256_set1_pd(tp.t_lo);
  const __m256d hi_thr = _mm256_set1_pd(tp.t_hi);
  const __m256d neg = _mm256_set1_pd(-tp.value);
  const __m256d pos = _mm256_set1_pd(tp.value);
  std::uint32_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256i c0 = c0v, c1 = c1v, c3 = _mm256_setzero_si256();
    __m256i c2 = _mm256_add_epi64(_mm256_set1_epi64x(j >> 1), lane);
    philox4(ks, c0, c1, c2, c3);
    __m256i ua = _mm256_or_si256(_mm256_slli_epi64(c0, 32), c1);
    __m256i ub = _mm256_or_si256(_mm256_slli_epi64(c2, 32), c3);
    __m256d vals[2];
    __m256d us[2] = {unit_from_u64(ua), unit_from_u64(ub)};
    for (int h = 0; h < 2; ++h) {
      __m256d lt = _mm256_cmp_pd(us[h], lo_thr, _CMP_LT_OQ);
      __m256d gt = _mm256_cmp_pd(us[h], hi_thr, _CMP_GT_OQ);
      __m256d v = _mm256_blendv_pd(_mm256_setzero_pd(), neg, lt);
      vals[h] = _mm256_blendv_pd(v, pos, gt);
    }
    __m256d ilo = _mm256_unpacklo_pd(vals[0], vals[1]);
    __m256d ihi = _mm256_unpackhi_pd(vals[0], vals[1]);
    _mm256_storeu_pd(out + j, _mm256_permute2f128_pd(ilo, ihi, 0x20));
    _mm256_storeu_pd(out + j + 4, _mm256_permute2f128_pd(ilo, ihi, 0x31));
  }
  fill_three_point_span(key, row, j, n, tp, out);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  std::size_t n8 = n & ~static_cast<std::size_t>(7);
  for (std::size_t i = 0; i < n8; i += 8) {
    acc_lo = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc_lo);
    acc_hi = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc_hi);
  }
  alignas(32) double lo[4], hi[4];
  _mm256_store_pd(lo, acc_lo);
  _mm256_store_pd(hi, acc_hi);
  double s01 = lo[0] + lo[1];
  double s23 = lo[2] + lo[3];
  double s45 = hi[0] + hi[1];
  double s67 = hi[2] + hi[3];
  double total = (s01 + s23) + (s45 + s67);
  for (std::size_t i = n8; i < n; ++i) total = std::fma(a[i], b[i], total);
  return total;
}

void axpy_avx2(double* acc, double w, const double* r, std::size_t n) {
  const __m256d wv = _mm256_set1_pd(w);
  std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4)
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(wv, _mm256_loadu_pd(r + i), _mm256_loadu_pd(acc + i)));
  for (std::size_t i = n4; i < n; ++i) acc[i] = std::fma(w, r[i], acc[i]);
}

}  // namespace

const KernelTable avx2_table = {fill_normal_avx2, fill_three_point_avx2, dot_avx2, axpy_avx2};

}  // namespace lpsketch::kernels::detail
