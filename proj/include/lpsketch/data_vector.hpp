#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lpsketch {

// A fixed-dimension real vector, stored either densely or as a sorted
// (index, value) list. Sparse storage never holds explicit zeros, so the
// stored entries of the two layouts visit the same nonzero scan order and
// every accumulation over them is bit-identical.
class DataVector {
 public:
  DataVector() = default;

  static DataVector dense(std::vector<double> values) {
    DataVector v;
    v.dim_ = values.size();
    v.values_ = std::move(values);
    v.sparse_ = false;
    return v;
  }

  static DataVector sparse(std::size_t dim, std::vector<std::uint32_t> indices,
                           std::vector<double> values) {
    if (indices.size() != values.size())
      throw std::invalid_argument("sparse vector: index/value length mismatch");
    for (std::size_t t = 0; t < indices.size(); ++t) {
      if (indices[t] >= dim)
        throw std::invalid_argument("sparse vector: index out of range");
      if (t > 0 && indices[t] <= indices[t - 1])
        throw std::invalid_argument("sparse vector: indices must be strictly ascending");
      if (values[t] == 0.0)
        throw std::invalid_argument("sparse vector: explicit zero entry");
    }
    DataVector v;
    v.dim_ = dim;
    v.indices_ = std::move(indices);
    v.values_ = std::move(values);
    v.sparse_ = true;
    return v;
  }

  std::size_t dim() const { return dim_; }
  bool is_sparse() const { return sparse_; }
  std::size_t stored_count() const { return values_.size(); }

  std::size_t nonzero_count() const {
    if (sparse_) return values_.size();
    std::size_t n = 0;
    for (double v : values_)
      if (v != 0.0) ++n;
    return n;
  }

  double at(std::size_t i) const {
    if (i >= dim_) throw std::out_of_range("DataVector::at: index out of range");
    if (!sparse_) return values_[i];
    auto it = std::lower_bound(indices_.begin(), indices_.end(), static_cast<std::uint32_t>(i));
    if (it != indices_.end() && *it == i) return values_[it - indices_.begin()];
    return 0.0;
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint32_t>& indices() const { return indices_; }

  // Visits stored nonzero entries in ascending index order.
  template <class F>
  void for_each_nonzero(F&& f) const {
    if (sparse_) {
      for (std::size_t t = 0; t < values_.size(); ++t) f(indices_[t], values_[t]);
    } else {
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] != 0.0) f(i, values_[i]);
    }
  }

 private:
  std::size_t dim_ = 0;
  bool sparse_ = false;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

// Merged scan over the union of the two supports, ascending index, calling
// f(i, x_i, y_i). Indices where both vectors are zero are skipped; a skipped
// zero term never perturbs compensated sums, so dense and sparse inputs with
// equal values produce identical accumulator trajectories.
template <class F>
void for_each_union(const DataVector& x, const DataVector& y, F&& f) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("for_each_union: dimension mismatch");
  struct Cursor {
    const DataVector* v;
    std::size_t t = 0;
    std::size_t idx() const {
      if (v->is_sparse())
        return t < v->indices().size() ? v->indices()[t] : SIZE_MAX;
      while (true) {
        if (t >= v->values().size()) return SIZE_MAX;
        if (v->values()[t] != 0.0) return t;
        ++const_cast<Cursor*>(this)->t;
      }
    }
    double val() const { return v->values()[t]; }
  };
  Cursor cx{&x}, cy{&y};
  while (true) {
    std::size_t ix = cx.idx(), iy = cy.idx();
    if (ix == SIZE_MAX && iy == SIZE_MAX) break;
    if (ix < iy) {
      f(ix, cx.val(), 0.0);
      ++cx.t;
    } else if (iy < ix) {
      f(iy, 0.0, cy.val());
      ++cy.t;
    } else {
      f(ix, cx.val(), cy.val());
      ++cx.t;
      ++cy.t;
    }
  }
}

// Neumaier-compensated accumulator: running sum plus a correction term that
// captures the low-order bits lost by each add.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }

  double value() const { return sum + carry; }
};

}  // namespace lpsketch
