#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "lpsketch/kernels.hpp"

using namespace lpsketch::kernels;

namespace {

bool bits_equal(double a, double b) {
  std::uint64_t x, y;
  std::memcpy(&x, &a, 8);
  std::memcpy(&y, &b, 8);
  return x == y;
}

struct IsaGuard {
  IsaGuard() : saved(active_isa()) {}
  ~IsaGuard() { force_isa(saved); }
  Isa saved;
};

}  // namespace

TEST_CASE("philox4x32-10 known answers") {
  const PhiloxBlock zero = philox4x32(0, 0, 0, 0, 0);
  CHECK(zero.w[0] == 0x6627e8d5u);
  CHECK(zero.w[1] == 0xe169c58du);
  CHECK(zero.w[2] == 0xbc57ac4cu);
  CHECK(zero.w[3] == 0x9b00dbd8u);

  const PhiloxBlock ff =
      philox4x32(0xFFFFFFFFFFFFFFFFull, 0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu);
  CHECK(ff.w[0] == 0x408f276du);
  CHECK(ff.w[1] == 0x41c83b0eu);
  CHECK(ff.w[2] == 0xa20bc7c6u);
  CHECK(ff.w[3] == 0x6d5451fdu);

  const PhiloxBlock pi =
      philox4x32(0x299f31d0a4093822ull, 0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u);
  CHECK(pi.w[0] == 0xd16cfe09u);
  CHECK(pi.w[1] == 0x94fdccebu);
  CHECK(pi.w[2] == 0x5001e420u);
  CHECK(pi.w[3] == 0x24126ea1u);
}

TEST_CASE("stream_u64 packs philox words by column parity") {
  const std::uint64_t key = 0x0123456789abcdefull;
  const std::uint64_t row = 0x00000002'00000001ull;  // lo32 = 1, hi32 = 2
  const PhiloxBlock b = philox4x32(key, 1u, 2u, 7u, 0u);
  const std::uint64_t even = (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
  const std::uint64_t odd = (static_cast<std::uint64_t>(b.w[2]) << 32) | b.w[3];
  CHECK(stream_u64(key, row, 14) == even);
  CHECK(stream_u64(key, row, 15) == odd);
  // distinct cells give distinct draws (full 64-bit block reuse would alias)
  CHECK(stream_u64(key, row, 14) != stream_u64(key, row, 16));
  CHECK(stream_u64(key, row, 0) != stream_u64(key, row + 1, 0));
}

TEST_CASE("unit_double endpoints and symmetry") {
  CHECK(unit_double(0) == std::ldexp(1.0, -53));
  CHECK(unit_double(~0ull) == 1.0 - std::ldexp(1.0, -53));
  // forced low bit: u and 1-u are both representable, never 0, 1/2 attainable
  CHECK(unit_double(0x8000000000000000ull) == 0.5 + std::ldexp(1.0, -53));
  for (std::uint64_t bits : {0x1ull << 11, 0xdeadbeefcafef00dull, 0x7fffffffffffffffull}) {
    const double u = unit_double(bits);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal quantile against high-precision table") {
  // reference: 60-digit erfc inversion, q = sqrt(2) erfinv(2p - 1).
  // The stream only ever evaluates u in [2^-53, 1 - 2^-53]; the table covers
  // exactly that domain (the AS 241 far branch loses accuracy well outside it).
  const struct {
    double p, q;
  } table[] = {
      {0x1p-53, -8.2095361516013868556},
      {1e-16, -8.2220822161304356127},
      {1e-12, -7.0344838253011319298},
      {1e-6, -4.7534243088228989482},
      {0.0001, -3.7190164854556805523},
      {0.025, -1.9599639845400542118},
      {0.2, -0.84162123357291416552},
      {0.4, -0.25334710313579974132},
      {0.5, 0.0},
      {0.6, 0.25334710313579974132},
      {0.975, 1.9599639845400538556},
      {0.9999, 3.7190164854557083867},
      {0.999999, 4.7534243088170877657},
  };
  for (const auto& [p, q] : table) {
    const double got = normal_quantile(p);
    if (q == 0.0) {
      CHECK(got == 0.0);
    } else {
      CHECK(std::fabs(got - q) / std::fabs(q) < 1e-14);
    }
  }
  // central-branch reflection is exact because 0.6-0.5 and 0.4-0.5 negate bitwise
  CHECK(bits_equal(normal_quantile(0.4), -normal_quantile(0.6)));
}

TEST_CASE("det_log matches libm within a few ulp") {
  double max_rel = 0.0;
  const std::uint64_t key = stream_key(11, 0);
  for (std::uint32_t i = 0; i < 20000; ++i) {
    const double u = unit_double(stream_u64(key, 0, i));
    const double rel = std::fabs(det_log(u) - std::log(u)) / std::fabs(std::log(u));
    max_rel = std::max(max_rel, rel);
  }
  CHECK(max_rel < 1e-15);
  CHECK(det_log(1.0) == 0.0);
  CHECK(std::fabs(det_log(0.5) + 0.69314718055994530942) < 1e-16);
  // exponent path: powers of two far from 1
  CHECK(std::fabs(det_log(std::ldexp(1.0, -40)) + 40 * 0.69314718055994530942) < 1e-12);
}

TEST_CASE("three point map thresholds") {
  const ThreePointParams tp{1.0 / 6.0, 5.0 / 6.0, std::sqrt(3.0)};
  CHECK(three_point_map(0.0001, tp) == -std::sqrt(3.0));
  CHECK(three_point_map(0.5, tp) == 0.0);
  CHECK(three_point_map(0.9999, tp) == std::sqrt(3.0));
  // boundary semantics: strict below t_lo, strict above t_hi
  CHECK(three_point_map(1.0 / 6.0, tp) == 0.0);
  CHECK(three_point_map(5.0 / 6.0, tp) == 0.0);

  // empirical frequencies over the keyed stream
  const std::uint64_t key = stream_key(3, 1);
  int neg = 0, zero = 0, pos = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = three_point_map(unit_double(stream_u64(key, 5, i)), tp);
    if (v < 0) ++neg;
    else if (v > 0) ++pos;
    else ++zero;
  }
  CHECK(std::fabs(neg / double(n) - 1.0 / 6.0) < 0.01);
  CHECK(std::fabs(zero / double(n) - 2.0 / 3.0) < 0.01);
  CHECK(std::fabs(pos / double(n) - 1.0 / 6.0) < 0.01);
}

TEST_CASE("fill kernels equal the per-entry composition") {
  IsaGuard guard;
  const std::uint64_t key = stream_key(17, 2);
  const ThreePointParams tp{0.05, 0.95, std::sqrt(10.0)};
  const std::uint32_t n = 100;
  std::vector<double> out(n);
  for (const Isa isa : available_isas()) {
    force_isa(isa);
    fill_normal_row(key, 9, n, out.data());
    for (std::uint32_t j = 0; j < n; ++j)
      CHECK(bits_equal(out[j], normal_quantile(unit_double(stream_u64(key, 9, j)))));
    fill_three_point_row(key, 9, n, tp, out.data());
    for (std::uint32_t j = 0; j < n; ++j)
      CHECK(bits_equal(out[j], three_point_map(unit_double(stream_u64(key, 9, j)), tp)));
  }
}

TEST_CASE("isa variants agree bitwise on every tail length") {
  IsaGuard guard;
  const std::uint64_t key = stream_key(23, 1);
  const ThreePointParams tp{1.0 / 6.0, 5.0 / 6.0, std::sqrt(3.0)};
  const auto isas = available_isas();
  REQUIRE(!isas.empty());
  for (std::uint32_t n : {1u, 2u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 64u, 65u, 257u}) {
    std::vector<double> ref_n(n), ref_t(n), a(n), b(n), got(n);
    force_isa(Isa::scalar);
    fill_normal_row(key, 1, n, ref_n.data());
    fill_three_point_row(key, 2, n, tp, ref_t.data());
    for (std::uint32_t i = 0; i < n; ++i) {
      a[i] = ref_n[i];
      b[i] = ref_t[i] + 0.375;
    }
    const double ref_dot = dot(a.data(), b.data(), n);
    std::vector<double> ref_axpy = b;
    axpy(ref_axpy.data(), -1.25, a.data(), n);

    for (const Isa isa : isas) {
      force_isa(isa);
      fill_normal_row(key, 1, n, got.data());
      for (std::uint32_t i = 0; i < n; ++i) CHECK(bits_equal(got[i], ref_n[i]));
      fill_three_point_row(key, 2, n, tp, got.data());
      for (std::uint32_t i = 0; i < n; ++i) CHECK(bits_equal(got[i], ref_t[i]));
      CHECK(bits_equal(dot(a.data(), b.data(), n), ref_dot));
      std::vector<double> acc = b;
      axpy(acc.data(), -1.25, a.data(), n);
      for (std::uint32_t i = 0; i < n; ++i) CHECK(bits_equal(acc[i], ref_axpy[i]));
    }
  }
}

TEST_CASE("dot accuracy against long double reference") {
  const std::uint64_t key = stream_key(31, 4);
  const std::size_t n = 1000;
  std::vector<double> a(n), b(n);
  fill_normal_row(key, 0, n, a.data());
  fill_normal_row(key, 1, n, b.data());
  long double ref = 0.0L;
  for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(a[i]) * b[i];
  const double got = dot(a.data(), b.data(), n);
  CHECK(std::fabs(got - static_cast<double>(ref)) <=
        1e-13 * std::max(1.0, std::fabs(static_cast<double>(ref))));
}

TEST_CASE("axpy is elementwise fma") {
  const std::size_t n = 37;
  std::vector<double> acc(n), r(n);
  const std::uint64_t key = stream_key(41, 6);
  fill_normal_row(key, 0, n, acc.data());
  fill_normal_row(key, 1, n, r.data());
  std::vector<double> expect = acc;
  for (std::size_t i = 0; i < n; ++i) expect[i] = std::fma(0.7531, r[i], expect[i]);
  axpy(acc.data(), 0.7531, r.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(bits_equal(acc[i], expect[i]));
}

TEST_CASE("seed derivation known answers") {
  CHECK(mix64(0) == 0u);
  CHECK(mix64(1) == 0x5692161d100b05e5ull);
  CHECK(mix64(0xDEADBEEFull) == 0x4e062702ec929eeaull);
  CHECK(stream_key(0, 0) == 0xe220a8397b1dcdafull);
  CHECK(stream_key(42, 3) == 0x581ce1ff0e4ae394ull);
  CHECK(derive_seed(0, 0) == 0x4e96155e5f0a1c3full);
  CHECK(derive_seed(1234, 56789) == 0xb92971f905b03514ull);
  // neighboring trial indices decorrelate
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(stream_key(7, 0) != stream_key(7, 1));
}

TEST_CASE("isa selection surface") {
  IsaGuard guard;
  CHECK(isa_available(Isa::scalar));
  const auto isas = available_isas();
  CHECK(isas.front() == Isa::scalar);
  for (const Isa isa : isas) {
    force_isa(isa);
    CHECK(active_isa() == isa);
    CHECK(std::string(isa_name(isa)).size() > 0);
  }
}
