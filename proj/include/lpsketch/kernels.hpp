#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lpsketch::kernels {

// Kernel variants. The scalar path is the reference semantics; the SIMD
// paths must reproduce it bit for bit (tested), so any variant may serve
// any call.
enum class Isa { scalar, avx2, avx512 };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
std::vector<Isa> available_isas();

// Active variant. Resolution order: explicit force_isa() call, else the
// LPSKETCH_KERNEL environment variable (scalar|avx2|avx512), else the best
// variant the CPU supports.
Isa active_isa();
void force_isa(Isa isa);

struct ThreePointParams {
  double t_lo;   // P(value = -v) mass, as a threshold on the unit draw
  double t_hi;   // 1 - P(value = +v)
  double value;  // v = sqrt(s)
};

// --- batch kernels (dispatched) ---

// Fills out[0..n) with N(0,1) draws for row `row`, columns 0..n-1 of the
// keyed stream.
void fill_normal_row(std::uint64_t key, std::uint64_t row, std::uint32_t n, double* out);

// Same stream positions mapped through the three-point quantizer.
void fill_three_point_row(std::uint64_t key, std::uint64_t row, std::uint32_t n,
                          const ThreePointParams& tp, double* out);

// Blocked 8-lane FMA dot product; lane L accumulates indices congruent to
// L mod 8, lanes merge as ((0+1)+(2+3)) + ((4+5)+(6+7)), then a sequential
// fused tail. Identical order in every variant.
double dot(const double* a, const double* b, std::size_t n);

// acc[j] = fma(w, r[j], acc[j]) elementwise.
void axpy(double* acc, double w, const double* r, std::size_t n);

// --- scalar building blocks (the stream definition; used by single-entry
// paths, tests, and the SIMD tails) ---

struct PhiloxBlock {
  std::uint32_t w[4];
};

// Philox4x32-10 with counter (c0,c1,c2,c3) and 64-bit key.
PhiloxBlock philox4x32(std::uint64_t key, std::uint32_t c0, std::uint32_t c1,
                       std::uint32_t c2, std::uint32_t c3);

// The (row, column) cell's 64-bit draw: block counter (lo(row), hi(row),
// col >> 1, 0); even columns take words (w0,w1), odd columns (w2,w3).
std::uint64_t stream_u64(std::uint64_t key, std::uint64_t row, std::uint32_t col);

// Map 64 random bits to (0,1): u = ((bits >> 11) | 1) * 2^-53. The forced
// low bit keeps u strictly inside the interval and symmetric about 1/2.
double unit_double(std::uint64_t bits);

// Inverse normal CDF, Wichura's PPND16 rational approximation, evaluated
// over a fixed deterministic primitive set (see det_log).
double normal_quantile(double u);

// Natural log via mantissa/exponent split and the atanh series, with a
// Cody-Waite ln2 split. Deterministic replacement for libm log so scalar
// and SIMD variants agree bitwise. Domain: positive normal doubles.
double det_log(double x);

double three_point_map(double u, const ThreePointParams& tp);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t v);

// Keyed stream id -> philox key.
std::uint64_t stream_key(std::uint64_t seed, std::uint32_t stream_id);

// Per-trial / per-repeat seed derivation.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace lpsketch::kernels
