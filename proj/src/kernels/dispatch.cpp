#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "primitives.hpp"

namespace lpsketch::kernels {

namespace {

using detail::KernelTable;

struct Variant {
  Isa isa;
  const KernelTable* table;
};

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#ifdef LPSKETCH_BUILD_AVX2
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::avx512:
#ifdef LPSKETCH_BUILD_AVX512
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table;
    case Isa::avx2:
#ifdef LPSKETCH_BUILD_AVX2
      return &detail::avx2_table;
#else
      return nullptr;
#endif
    case Isa::avx512:
#ifdef LPSKETCH_BUILD_AVX512
      return &detail::avx512_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Variant resolve_default() {
  if (const char* env = std::getenv("LPSKETCH_KERNEL")) {
    std::string v(env);
    Isa isa;
    if (v == "scalar")
      isa = Isa::scalar;
    else if (v == "avx2")
      isa = Isa::avx2;
    else if (v == "avx512")
      isa = Isa::avx512;
    else
      throw std::runtime_error("LPSKETCH_KERNEL: unknown kernel variant '" + v + "'");
    if (!cpu_has(isa))
      throw std::runtime_error("LPSKETCH_KERNEL: variant '" + v + "' not available on this CPU");
    return {isa, table_for(isa)};
  }
  if (cpu_has(Isa::avx512)) return {Isa::avx512, table_for(Isa::avx512)};
  if (cpu_has(Isa::avx2)) return {Isa::avx2, table_for(Isa::avx2)};
  return {Isa::scalar, &detail::scalar_table};
}

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

const KernelTable& active_table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t) return *t;
  Variant v = resolve_default();
  g_isa.store(v.isa, std::memory_order_relaxed);
  g_table.store(v.table, std::memory_order_release);
  return *v.table;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
  }
  return "?";
}

bool isa_available(Isa isa) { return cpu_has(isa); }

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::avx512})
    if (cpu_has(isa)) out.push_back(isa);
  return out;
}

Isa active_isa() {
  active_table();
  return g_isa.load(std::memory_order_relaxed);
}

void force_isa(Isa isa) {
  if (!cpu_has(isa))
    throw std::runtime_error(std::string("force_isa: variant '") + isa_name(isa) +
                             "' not available on this CPU");
  g_isa.store(isa, std::memory_order_relaxed);
  g_table.store(table_for(isa), std::memory_order_release);
}

void fill_normal_row(std::uint64_t key, std::uint64_t row, std::uint32_t n, double* out) {
  active_table().fill_normal(key, row, n, out);
}

void fill_three_point_row(std::uint64_t key, std::uint64_t row, std::uint32_t n,
                          const ThreePointParams& tp, double* out) {
  active_table().fill_three_point(key, row, n, tp, out);
}

double dot(const double* a, const double* b, std::size_t n) {
  return active_table().dot(a, b, n);
}

void axpy(double* acc, double w, const double* r, std::size_t n) {
  active_table().axpy(acc, w, r, n);
}

PhiloxBlock philox4x32(std::uint64_t key, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                       std::uint32_t c3) {
  return detail::philox4x32_impl(key, c0, c1, c2, c3);
}

std::uint64_t stream_u64(std::uint64_t key, std::uint64_t row, std::uint32_t col) {
  return detail::stream_u64_impl(key, row, col);
}

double unit_double(std::uint64_t bits) { return detail::unit_double_impl(bits); }

double normal_quantile(double u) { return detail::normal_quantile_impl(u); }

double det_log(double x) { return detail::det_log_impl(x); }

double three_point_map(double u, const ThreePointParams& tp) {
  return detail::three_point_map_impl(u, tp);
}

std::uint64_t mix64(std::uint64_t v) {
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
  return v ^ (v >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint32_t stream_id) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(stream_id) + 1));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 0xD1B54A32D192ED03ull));
}

}  // namespace lpsketch::kernels
