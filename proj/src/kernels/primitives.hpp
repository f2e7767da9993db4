#pragma once

// Scalar definitions of the keyed stream and its transforms. These are the
// reference semantics: the AVX2/AVX-512 kernels mirror the exact operation
// sequence (every add, multiply, divide, sqrt and explicit fma in the same
// order) so all variants emit bit-identical values.

#include <bit>
#include <cmath>
#include <cstdint>

#include "lpsketch/kernels.hpp"

namespace lpsketch::kernels::detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline PhiloxBlock philox4x32_impl(std::uint64_t key, std::uint32_t c0, std::uint32_t c1,
                                   std::uint32_t c2, std::uint32_t c3) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int r = 0; r < 10; ++r) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
    std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

inline double unit_double_impl(std::uint64_t bits) {
  std::uint64_t v = (bits >> 11) | 1u;
  return static_cast<double>(v) * 0x1p-53;
}

// PPND16 coefficients (Wichura, Applied Statistics 37(3), algorithm AS 241).
inline constexpr double kQA[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e2,  1.9715909503065514427e3,
    1.3731693765509461125e4,  4.5921953931549871457e4,  6.7265770927008700853e4,
    3.3430575583588128105e4,  2.5090809287301226727e3};
inline constexpr double kQB[8] = {
    1.0,                      4.2313330701600911252e1,  6.8718700749205790830e2,
    5.3941960214247511077e3,  2.1213794301586595867e4,  3.9307895800092710610e4,
    2.8729085735721942674e4,  5.2264952788528545610e3};
inline constexpr double kQC[8] = {
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
inline constexpr double kQD[8] = {
    1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
inline constexpr double kQE[8] = {
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
inline constexpr double kQF[8] = {
    1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

// atanh series: log(m) = 2z * sum w^n / (2n+1), z = (m-1)/(m+1), w = z^2.
inline constexpr double kLogC[11] = {
    1.0,        1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0,  1.0 / 9.0,  1.0 / 11.0,
    1.0 / 13.0, 1.0 / 15.0, 1.0 / 17.0, 1.0 / 19.0, 1.0 / 21.0};

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline double det_log_impl(double x) {
  std::uint64_t ix = std::bit_cast<std::uint64_t>(x);
  double eraw = static_cast<double>(static_cast<std::int64_t>(ix >> 52));
  std::uint64_t mbits = (ix & 0xFFFFFFFFFFFFFull) | 0x3FF0000000000000ull;
  double m = std::bit_cast<double>(mbits);
  double e = eraw - 1023.0;
  if (m > kSqrt2) {
    m = m * 0.5;
    e = e + 1.0;
  }
  double zm1 = m - 1.0;
  double zp1 = m + 1.0;
  double z = zm1 / zp1;
  double w = z * z;
  double poly = kLogC[10];
  for (int i = 9; i >= 0; --i) poly = std::fma(poly, w, kLogC[i]);
  double z2 = z + z;
  double logm = z2 * poly;
  double t1 = e * kLn2Hi;
  double t2 = t1 + logm;
  return std::fma(e, kLn2Lo, t2);
}

inline double rational8(const double* num, const double* den, double r) {
  double n = num[7];
  for (int i = 6; i >= 0; --i) n = std::fma(n, r, num[i]);
  double d = den[7];
  for (int i = 6; i >= 0; --i) d = std::fma(d, r, den[i]);
  return n / d;
}

inline double normal_quantile_impl(double u) {
  double q = u - 0.5;
  double aq = std::fabs(q);
  if (aq <= 0.425) {
    double t = q * q;
    double r = 0.180625 - t;
    double rat = rational8(kQA, kQB, r);
    return q * rat;
  }
  double om = 1.0 - u;
  double ps = u < om ? u : om;
  double nl = -det_log_impl(ps);
  double rt = std::sqrt(nl);
  double z;
  if (rt <= 5.0) {
    double s = rt - 1.6;
    z = rational8(kQC, kQD, s);
  } else {
    double s = rt - 5.0;
    z = rational8(kQE, kQF, s);
  }
  return q < 0.0 ? -z : z;
}

inline double three_point_map_impl(double u, const ThreePointParams& tp) {
  if (u < tp.t_lo) return -tp.value;
  if (u > tp.t_hi) return tp.value;
  return 0.0;
}

inline std::uint64_t stream_u64_impl(std::uint64_t key, std::uint64_t row, std::uint32_t col) {
  PhiloxBlock b = philox4x32_impl(key, static_cast<std::uint32_t>(row),
                                  static_cast<std::uint32_t>(row >> 32), col >> 1, 0);
  if (col & 1u) return (static_cast<std::uint64_t>(b.w[2]) << 32) | b.w[3];
  return (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
}

// Scalar span fills, used whole by the scalar kernel and as the tail of the
// SIMD kernels. j0 must be even (column pairs share a philox block).
inline void fill_normal_span(std::uint64_t key, std::uint64_t row, std::uint32_t j0,
                             std::uint32_t n, double* out) {
  std::uint32_t c0 = static_cast<std::uint32_t>(row);
  std::uint32_t c1 = static_cast<std::uint32_t>(row >> 32);
  for (std::uint32_t j = j0; j < n; j += 2) {
    PhiloxBlock b = philox4x32_impl(key, c0, c1, j >> 1, 0);
    std::uint64_t ua = (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
    out[j] = normal_quantile_impl(unit_double_impl(ua));
    if (j + 1 < n) {
      std::uint64_t ub = (static_cast<std::uint64_t>(b.w[2]) << 32) | b.w[3];
      out[j + 1] = normal_quantile_impl(unit_double_impl(ub));
    }
  }
}

inline void fill_three_point_span(std::uint64_t key, std::uint64_t row, std::uint32_t j0,
                                  std::uint32_t n, const ThreePointParams& tp, double* out) {
  std::uint32_t c0 = static_cast<std::uint32_t>(row);
  std::uint32_t c1 = static_cast<std::uint32_t>(row >> 32);
  for (std::uint32_t j = j0; j < n; j += 2) {
    PhiloxBlock b = philox4x32_impl(key, c0, c1, j >> 1, 0);
    std::uint64_t ua = (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
    out[j] = three_point_map_impl(unit_double_impl(ua), tp);
    if (j + 1 < n) {
      std::uint64_t ub = (static_cast<std::uint64_t>(b.w[2]) << 32) | b.w[3];
      out[j + 1] = three_point_map_impl(unit_double_impl(ub), tp);
    }
  }
}

struct KernelTable {
  void (*fill_normal)(std::uint64_t, std::uint64_t, std::uint32_t, double*);
  void (*fill_three_point)(std::uint64_t, std::uint64_t, std::uint32_t,
                           const ThreePointParams&, double*);
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
};

extern const KernelTable scalar_table;
#ifdef LPSKETCH_BUILD_AVX2
extern const KernelTable avx2_table;
#endif
#ifdef LPSKETCH_BUILD_AVX512
extern const KernelTable avx512_table;
#endif

}  // namespace lpsketch::kernels::detail
