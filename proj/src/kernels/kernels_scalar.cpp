#include "primitives.hpp"

namespace lpsketch::kernels::detail {

namespace {

void fill_normal_scalar(std::uint64_t key, std::uint64_t row, std::uint32_t n, double* out) {
  fill_normal_span(key, row, 0, n, out);
}

void fill_three_point_scalar(std::uint64_t key, std::uint64_t row, std::uint32_t n,
                             const ThreePointParams& tp, double* out) {
  fill_three_point_span(key, row, 0, n, tp, out);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::size_t n8 = n & ~static_cast<std::size_t>(7);
  for (std::size_t i = 0; i < n8; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] = std::fma(a[i + l], b[i + l], acc[l]);
  double s01 = acc[0] + acc[1];
  double s23 = acc[2] + acc[3];
  double s45 = acc[4] + acc[5];
  double s67 = acc[6] + acc[7];
  double total = (s01 + s23) + (s45 + s67);
  for (std::size_t i = n8; i < n; ++i) total = std::fma(a[i], b[i], total);
  return total;
}

void axpy_scalar(double* acc, double w, const double* r, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = std::fma(w, r[i], acc[i]);
}

}  // namespace

const KernelTable scalar_table = {fill_normal_scalar, fill_three_point_scalar, dot_scalar,
                                  axpy_scalar};

}  // namespace lpsketch::kernels::detail
