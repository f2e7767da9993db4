#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "lpsketch/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;
namespace k = lpsketch::kernels;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
double bench(std::size_t entries_per_rep, Fn&& fn) {
  fn();  // warm up
  std::size_t reps = 1;
  double dt = 0.0;
  for (;;) {
    const auto t0 = Clock::now();
    for (std::size_t r = 0; r < reps; ++r) fn();
    dt = seconds_since(t0);
    if (dt > 0.2) break;
    reps *= 4;
  }
  return dt * 1e9 / (static_cast<double>(reps) * entries_per_rep);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 1 << 16;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--n") == 0 && i + 1 < argc) {
      n = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--n entries]\n", argv[0]);
      return 1;
    }
  }

  const std::uint64_t key = k::stream_key(1, 1);
  const k::ThreePointParams tp{1.0 / 6.0, 5.0 / 6.0, std::sqrt(3.0)};
  std::vector<double> row(n), other(n);
  k::fill_normal_row(key, 1, n, other.data());

  std::printf("%-8s %14s %14s %14s\n", "isa", "normal ns/ent", "3pt ns/ent", "dot ns/ent");
  for (const k::Isa isa : k::available_isas()) {
    k::force_isa(isa);
    const double t_norm = bench(n, [&] { k::fill_normal_row(key, 2, n, row.data()); });
    const double t_3pt = bench(n, [&] { k::fill_three_point_row(key, 3, n, tp, row.data()); });
    volatile double sink = 0.0;
    const double t_dot = bench(n, [&] { sink = k::dot(row.data(), other.data(), n); });
    (void)sink;
    std::printf("%-8s %14.3f %14.3f %14.3f\n", k::isa_name(isa), t_norm, t_3pt, t_dot);
  }
  return 0;
}
