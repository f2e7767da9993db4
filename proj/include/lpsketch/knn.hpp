#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpsketch/data_vector.hpp"
#include "lpsketch/projection.hpp"

namespace lpsketch {

struct LabeledDataset {
  std::vector<DataVector> rows;
  std::vector<int> labels;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
};

// exact distances when estimator_id == "exact"; otherwise the named sketch
// or sampling estimator with `k` projections/samples, repeated over
// `repeats` seeds derived from `seed`.
struct DistanceSource {
  std::string estimator_id = "exact";
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  std::uint32_t repeats = 1;
  Distribution dist;
};

struct KnnResult {
  std::uint32_t m = 0;
  int p = 4;
  std::string distance_source;
  std::uint32_t k = 0;
  std::uint32_t seed_repeats = 1;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::vector<double> per_repeat;
};

KnnResult knn_classify(const LabeledDataset& ds, std::uint32_t m, int p,
                       const DistanceSource& source, int threads = 0);

// Exact-distance error rates over an (m, p) grid.
std::vector<KnnResult> p_sweep(const LabeledDataset& ds,
                               const std::vector<std::uint32_t>& m_list,
                               const std::vector<int>& p_list, int threads = 0);

}  // namespace lpsketch
