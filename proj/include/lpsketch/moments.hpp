#pragma once

#include <cstddef>

#include "lpsketch/data_vector.hpp"

namespace lpsketch {

// Joint power sums S(a,b) = sum_i x_i^a y_i^b for a,b in 0..6, a+b <= 8,
// plus the difference power sums sum_i |x_i - y_i|^p for even p up to 8.
// Everything the closed-form variance expressions consume.
class MomentTable {
 public:
  MomentTable() = default;
  MomentTable(std::size_t dim, std::size_t nnz_x, std::size_t nnz_y)
      : dim_(dim), nnz_x_(nnz_x), nnz_y_(nnz_y) {}

  std::size_t dim() const { return dim_; }
  std::size_t nnz_x() const { return nnz_x_; }
  std::size_t nnz_y() const { return nnz_y_; }

  double s(int a, int b) const {
    check_order(a, b);
    return s_[a][b];
  }

  // p in {2, 4, 6, 8}
  double diff_pow(int p) const {
    if (p != 2 && p != 4 && p != 6 && p != 8)
      throw std::invalid_argument("MomentTable::diff_pow: p must be 2, 4, 6 or 8");
    return diff_[p / 2 - 1];
  }

  void set_s(int a, int b, double v) {
    check_order(a, b);
    s_[a][b] = v;
  }
  void set_diff_pow(int p, double v) { diff_[p / 2 - 1] = v; }

 private:
  static void check_order(int a, int b) {
    if (a < 0 || b < 0 || a > 6 || b > 6 || a + b > 8)
      throw std::invalid_argument("MomentTable::s: order out of range (a,b in 0..6, a+b <= 8)");
  }

  std::size_t dim_ = 0;
  std::size_t nnz_x_ = 0;
  std::size_t nnz_y_ = 0;
  double s_[7][7] = {};
  double diff_[4] = {};
};

MomentTable compute_moments(const DataVector& x, const DataVector& y);

// sum_i |x_i - y_i|^p, even p in {2,...,10}, single compensated scan.
double exact_lp(const DataVector& x, const DataVector& y, int p);

// sum_i x_i^q, q in 1..10, compensated.
double power_sum(const DataVector& x, int q);

// 1 - d_(4)(x,y) / (S(4,0) + S(0,4)); requires a nonzero denominator.
double beta4(const DataVector& x, const DataVector& y);

// E[(a'r)(b'r)(c'r)(d'r)] for r ~ N(0, I): ab*cd + ac*bd + ad*bc pairings.
double gaussian_quartic_expectation(const DataVector& a, const DataVector& b,
                                    const DataVector& c, const DataVector& d);

}  // namespace lpsketch
