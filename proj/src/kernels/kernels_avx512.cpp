#include <immintrin.h>

#include "primitives.hpp"

// AVX-512 variants: eight philox blocks (sixteen stream columns) per pass.
// Same reference operation sequence as the scalar path, so outputs are
// bit-identical; remainders fall back to the scalar span.

namespace lpsketch::kernels::detail {

namespace {

struct PhiloxState8 {
  __m512i k0[10];
  __m512i k1[10];

  explicit PhiloxState8(std::uint64_t key) {
    std::uint32_t a = static_cast<std::uint32_t>(key);
    std::uint32_t b = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
      k0[r] = _mm512_set1_epi64(static_cast<long long>(a));
      k1[r] = _mm512_set1_epi64(static_cast<long long>(b));
      a += kPhiloxW0;
      b += kPhiloxW1;
    }
  }
};

inline void philox8(const PhiloxState8& ks, __m512i& c0, __m512i& c1, __m512i& c2, __m512i& c3) {
  const __m512i m0 = _mm512_set1_epi64(0xD2511F53ll);
  const __m512i m1 = _mm512_set1_epi64(0xCD9E8D57ll);
  const __m512i mask32 = _mm512_set1_epi64(0xFFFFFFFFll);
  for (int r = 0; r < 10; ++r) {
    __m512i p0 = _mm512_mul_epu32(c0, m0);
    __m512i p1 = _mm512_mul_epu32(c2, m1);
    __m512i hi0 = _mm512_srli_epi64(p0, 32);
    __m512i lo0 = _mm512_and_epi64(p0, mask32);
    __m512i hi1 = _mm512_srli_epi64(p1, 32);
    __m512i lo1 = _mm512_and_epi64(p1, mask32);
    c0 = _mm512_ternarylogic_epi64(hi1, c1, ks.k0[r], 0x96);
    c1 = lo1;
    c2 = _mm512_ternarylogic_epi64(hi0, c3, ks.k1[r], 0x96);
    c3 = lo0;
  }
}

inline __m512d unit_from_u64(__m512i u) {
  __m512i v = _mm512_or_epi64(_mm512_srli_epi64(u, 11), _mm512_set1_epi64(1));
  return _mm512_mul_pd(_mm512_cvtepu64_pd(v), _mm512_set1_pd(0x1p-53));
}

inline __m512d horner8(const double* c, __m512d r) {
  __m512d acc = _mm512_set1_pd(c[7]);
  for (int i = 6; i >= 0; --i) acc = _mm512_fmadd_pd(acc, r, _mm512_set1_pd(c[i]));
  return acc;
}

inline __m512d det_log8(__m512d x) {
  const __m512i mant_mask = _mm512_set1_epi64(0xFFFFFFFFFFFFFll);
  const __m512i one_bits = _mm512_set1_epi64(0x3FF0000000000000ll);
  __m512i ix = _mm512_castpd_si512(x);
  __m512d eraw = _mm512_cvtepu64_pd(_mm512_srli_epi64(ix, 52));
  __m512d m =
      _mm512_castsi512_pd(_mm512_or_epi64(_mm512_and_epi64(ix, mant_mask), one_bits));
  __m512d e = _mm512_sub_pd(eraw, _mm512_set1_pd(1023.0));
  __mmask8 big = _mm512_cmp_pd_mask(m, _mm512_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm512_mask_mul_pd(m, big, m, _mm512_set1_pd(0.5));
  e = _mm512_mask_add_pd(e, big, e, _mm512_set1_pd(1.0));
  __m512d zm1 = _mm512_sub_pd(m, _mm512_set1_pd(1.0));
  __m512d zp1 = _mm512_add_pd(m, _mm512_set1_pd(1.0));
  __m512d z = _mm512_div_pd(zm1, zp1);
  __m512d w = _mm512_mul_pd(z, z);
  __m512d poly = _mm512_set1_pd(kLogC[10]);
  for (int i = 9; i >= 0; --i) poly = _mm512_fmadd_pd(poly, w, _mm512_set1_pd(kLogC[i]));
  __m512d z2 = _mm512_add_pd(z, z);
  __m512d logm = _mm512_mul_pd(z2, poly);
  __m512d t1 = _mm512_mul_pd(e, _mm512_set1_pd(kLn2Hi));
  __m512d t2 = _mm512_add_pd(t1, logm);
  return _mm512_fmadd_pd(e, _mm512_set1_pd(kLn2Lo), t2);
}

inline __m512d normal_quantile8(__m512d u, int& far_mask) {
  const __m512d half = _mm512_set1_pd(0.5);
  const __m512i signbit = _mm512_set1_epi64(0x8000000000000000ull);
  __m512d q = _mm512_sub_pd(u, half);
  __m512d aq = _mm512_abs_pd(q);
  __mmask8 central = _mm512_cmp_pd_mask(aq, _mm512_set1_pd(0.425), _CMP_LE_OQ);

  __m512d t = _mm512_mul_pd(q, q);
  __m512d r = _mm512_sub_pd(_mm512_set1_pd(0.180625), t);
  __m512d zc = _mm512_mul_pd(q, _mm512_div_pd(horner8(kQA, r), horner8(kQB, r)));

  far_mask = 0;
  if (central == 0xFF) return zc;

  __m512d om = _mm512_sub_pd(_mm512_set1_pd(1.0), u);
  __m512d ps = _mm512_min_pd(u, om);
  __m512d nl = _mm512_castsi512_pd(_mm512_xor_epi64(_mm512_castpd_si512(det_log8(ps)), signbit));
  __m512d rt = _mm512_sqrt_pd(nl);
  __mmask8 mid = _mm512_cmp_pd_mask(rt, _mm512_set1_pd(5.0), _CMP_LE_OQ);
  __m512d s = _mm512_sub_pd(rt, _mm512_set1_pd(1.6));
  __m512d zt = _mm512_div_pd(horner8(kQC, s), horner8(kQD, s));
  __mmask8 neg = _mm512_cmp_pd_mask(q, _mm512_setzero_pd(), _CMP_LT_OQ);
  zt = _mm512_castsi512_pd(
      _mm512_mask_xor_epi64(_mm512_castpd_si512(zt), neg, _mm512_castpd_si512(zt), signbit));
  far_mask = static_cast<int>(static_cast<unsigned>(~central & ~mid) & 0xFFu);
  return _mm512_mask_blend_pd(central, zt, zc);
}

void fill_normal_avx512(std::uint64_t key, std::uint64_t row, std::uint32_t n, double* out) {
  PhiloxState8 ks(key);
  const __m512i c0v = _mm512_set1_epi64(static_cast<long long>(static_cast<std::uint32_t>(row)));
  const __m512i c1v =
      _mm512_set1_epi64(static_cast<long long>(static_cast<std::uint32_t>(row >> 32)));
  const __m512i lane = _mm512_setr_epi64(0, 1, 2, 3, 4, 5, 6, 7);
  const __m512i idx_lo = _mm512_setr_epi64(0, 8, 1, 9, 2, 10, 3, 11);
  const __m512i idx_hi = _mm512_setr_epi64(4, 12, 5, 13, 6, 14, 7, 15);
  std::uint32_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m512i c0 = c0v, c1 = c1v, c3 = _mm512_setzero_si512();
    __m512i c2 = _mm512_add_epi64(_mm512_set1_epi64(j >> 1), lane);
    philox8(ks, c0, c1, c2, c3);
    __m512i ua = _mm512_or_epi64(_mm512_slli_epi64(c0, 32), c1);
    __m512i ub = _mm512_or_epi64(_mm512_slli_epi64(c2, 32), c3);
    int fa = 0, fb = 0;
    __m512d za = normal_quantile8(unit_from_u64(ua), fa);
    __m512d zb = normal_quantile8(unit_from_u64(ub), fb);
    _mm512_storeu_pd(out + j, _mm512_permutex2var_pd(za, idx_lo, zb));
    _mm512_storeu_pd(out + j + 8, _mm512_permutex2var_pd(za, idx_hi, zb));
    if (fa | fb) {
      for (int l = 0; l < 8; ++l) {
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

void fill_three_point_avx512(std::uint64_t key, std::uint64_t row, std::uint32_t n,
                             const ThreePointParams& tp, double* out) {
  PhiloxState8 ks(key);
  const __m512i c0v = _mm512_set1_epi64(static_cast<long long>(static_cast<std::uint32_t>(row)));
  const __m512i c1v =
      _mm512_set1_epi64(static_cast<long long>(static_cast<std::uint32_t>(row >> 32)));
  const __m512i lane = _mm512_setr_epi64(0, 1, 2, 3, 4, 5, 6, 7);
  const __m512i idx_lo = _mm512_setr_epi64(0, 8, 1, 9, 2, 10, 3, 11);
  const __m512i idx_hi = _mm512_setr_epi64(4, 12, 5, 13, 6, 14, 7, 15);
  const __m512d lo_thr = _mm512_set1_pd(tp.t_lo);
  const __m512d hi_thr = _mm512_set1_pd(tp.t_hi);
  const __m512d negv = _mm512_set1_pd(-tp.value);
  const __m512d posv = _mm512_set1_pd(tp.value);
  std::uint32_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m512i c0 = c0v, c1 = c1v, c3 = _mm512_setzero_si512();
    __m512i c2 = _mm512_add_epi64(_mm512_set1_epi64(j >> 1), lane);
    philox8(ks, c0, c1, c2, c3);
    __m512i ua = _mm512_or_epi64(_mm512_slli_epi64(c0, 32), c1);
    __m512i ub = _mm512_or_epi64(_mm512_slli_epi64(c2, 32), c3);
    __m512d vals[2];
    __m512d us[2] = {unit_from_u64(ua), unit_from_u64(ub)};
    for (int h = 0; h < 2; ++h) {
      __mmask8 lt = _mm512_cmp_pd_mask(us[h], lo_thr, _CMP_LT_OQ);
      __mmask8 gt = _mm512_cmp_pd_mask(us[h], hi_thr, _CMP_GT_OQ);
      __m512d v = _mm512_mask_blend_pd(lt, _mm512_setzero_pd(), negv);
      vals[h] = _mm512_mask_blend_pd(gt, v, posv);
    }
    _mm512_storeu_pd(out + j, _mm512_permutex2var_pd(vals[0], idx_lo, vals[1]));
    _mm512_storeu_pd(out + j + 8, _mm512_permutex2var_pd(vals[0], idx_hi, vals[1]));
  }
  fill_three_point_span(key, row, j, n, tp, out);
}

double dot_avx512(const double* a, const double* b, std::size_t n) {
  __m512d acc = _mm512_setzero_pd();
  std::size_t n8 = n & ~static_cast<std::size_t>(7);
  for (std::size_t i = 0; i < n8; i += 8)
    acc = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i), acc);
  alignas(64) double lanes[8];
  _mm512_store_pd(lanes, acc);
  double s01 = lanes[0] + lanes[1];
  double s23 = lanes[2] + lanes[3];
  double s45 = lanes[4] + lanes[5];
  double s67 = lanes[6] + lanes[7];
  double total = (s01 + s23) + (s45 + s67);
  for (std::size_t i = n8; i < n; ++i) total = std::fma(a[i], b[i], total);
  return total;
}

void axpy_avx512(double* acc, double w, const double* r, std::size_t n) {
  const __m512d wv = _mm512_set1_pd(w);
  std::size_t n8 = n & ~static_cast<std::size_t>(7);
  for (std::size_t i = 0; i < n8; i += 8)
    _mm512_storeu_pd(acc + i, _mm512_fmadd_pd(wv, _mm512_loadu_pd(r + i), _mm512_loadu_pd(acc + i)));
  for (std::size_t i = n8; i < n; ++i) acc[i] = std::fma(w, r[i], acc[i]);
}

}  // namespace

const KernelTable avx512_table = {fill_normal_avx512, fill_three_point_avx512, dot_avx512,
                                  axpy_avx512};

}  // namespace lpsketch::kernels::detail
