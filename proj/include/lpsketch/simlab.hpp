#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpsketch/data_vector.hpp"
#include "lpsketch/kernels.hpp"
#include "lpsketch/projection.hpp"

namespace lpsketch {

// Sequential convenience stream over the counter-based generator, for data
// synthesis (not used on the sketching hot path).
class PhiloxEngine {
 public:
  PhiloxEngine(std::uint64_t seed, std::uint64_t stream)
      : key_(kernels::stream_key(seed, stream)) {}

  std::uint64_t next_u64() { return kernels::stream_u64(key_, n_++, 0); }
  double next_uniform() { return kernels::unit_double(next_u64()); }
  double next_normal() { return kernels::normal_quantile(next_uniform()); }

  // uniform integer in [0, bound), bound >= 1
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t n_ = 0;
};

double sample_gamma(PhiloxEngine& g, double shape, double scale);
double sample_beta(PhiloxEngine& g, double a, double b);

struct PairParams {
  double gamma_shape = 2.0;
  double gamma_scale = 1.0;
  double beta_a = 2.0;
  double beta_b = 2.0;
  // gamma/beta kinds: y = (1 - pair_noise) * x + pair_noise * fresh draw,
  // so 0 gives an identical pair and 1 an independent one.
  double pair_noise = 1.0;
  // sparse-overlap kind
  double sparsity1 = 0.1;
  double sparsity2 = 0.1;
  double overlap = 0.5;              // fraction of the smaller support shared
  std::string value_kind = "gamma";  // nonzero values: gamma | uniform
  bool identical_values = false;     // shared support carries equal values
};

std::pair<DataVector, DataVector> generate_pair(const std::string& kind,
                                                const PairParams& params,
                                                std::size_t dim, std::uint64_t seed);

struct ExperimentSpec {
  DataVector x, y;
  std::vector<std::uint32_t> k_grid;  // strictly increasing, nonempty
  std::uint32_t trials = 1000;        // >= 100
  std::vector<std::string> estimators;
  Distribution dist;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

struct MseRow {
  std::string estimator_id;
  std::uint32_t k = 0;
  std::uint32_t trials = 0;
  std::optional<double> empirical_mse;  // mean (v - d)^2 / d^2; absent for var-only rows
  std::optional<double> theoretical_norm_var;
  double bias_sq_norm = 0.0;
};

std::vector<MseRow> run_mse(const ExperimentSpec& spec);

}  // namespace lpsketch
