#include "lpsketch/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "lpsketch/estimators.hpp"
#include "lpsketch/moments.hpp"

namespace lpsketch {

double sample_gamma(PhiloxEngine& g, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("sample_gamma: shape and scale must be positive");
  if (shape < 1.0) {
    const double u = g.next_uniform();
    return sample_gamma(g, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double xn, v;
    do {
      xn = g.next_normal();
      v = 1.0 + c * xn;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = g.next_uniform();
    if (std::log(u) < 0.5 * xn * xn + d - d * v + d * std::log(v)) return scale * d * v;
  }
}

double sample_beta(PhiloxEngine& g, double a, double b) {
  const double g1 = sample_gamma(g, a, 1.0);
  const double g2 = sample_gamma(g, b, 1.0);
  return g1 / (g1 + g2);
}

namespace {

DataVector sparse_from_unsorted(std::size_t dim, std::vector<std::uint32_t> idx,
                                std::vector<double> val) {
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&idx](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
  std::vector<std::uint32_t> si(idx.size());
  std::vector<double> sv(idx.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    si[i] = idx[order[i]];
    sv[i] = val[order[i]];
  }
  return DataVector::sparse(dim, std::move(si), std::move(sv));
}

}  // namespace

std::pair<DataVector, DataVector> generate_pair(const std::string& kind,
                                                const PairParams& params,
                                                std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("generate_pair: dim must be >= 1");
  if (kind == "gamma" || kind == "beta") {
    if (params.pair_noise < 0.0 || params.pair_noise > 1.0)
      throw std::invalid_argument("generate_pair: pair_noise must be in [0,1]");
    PhiloxEngine gx(seed, 10), gy(seed, 11);
    std::vector<double> xs(dim), ys(dim);
    const double w = params.pair_noise;
    for (std::size_t i = 0; i < dim; ++i) {
      double xv, yraw;
      if (kind == "gamma") {
        xv = sample_gamma(gx, params.gamma_shape, params.gamma_scale);
        yraw = sample_gamma(gy, params.gamma_shape, params.gamma_scale);
      } else {
        xv = sample_beta(gx, params.beta_a, params.beta_b);
        yraw = sample_beta(gy, params.beta_a, params.beta_b);
      }
      xs[i] = xv;
      ys[i] = (1.0 - w) * xv + w * yraw;
    }
    return {DataVector::dense(std::move(xs)), DataVector::dense(std::move(ys))};
  }
  if (kind == "sparse-overlap") {
    if (params.overlap < 0.0 || params.overlap > 1.0)
      throw std::invalid_argument("generate_pair: overlap fraction must be in [0,1]");
    const auto count = [dim](double frac) {
      const auto n = static_cast<std::size_t>(std::llround(frac * static_cast<double>(dim)));
      return std::min(n, dim);
    };
    const std::size_t n1 = count(params.sparsity1);
    const std::size_t n2 = count(params.sparsity2);
    const std::size_t base = std::min(n1, n2);
    const std::size_t novl =
        static_cast<std::size_t>(std::llround(params.overlap * static_cast<double>(base)));
    if (novl > base)
      throw std::invalid_argument("generate_pair: overlap exceeds the smaller support");
    if (n1 + n2 - novl > dim)
      throw std::invalid_argument("generate_pair: supports do not fit the dimension");

    PhiloxEngine perm_eng(seed, 12), val_eng(seed, 13);
    std::vector<std::uint32_t> perm(dim);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i + 1 < dim; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(perm_eng.next_below(dim - i));
      std::swap(perm[i], perm[j]);
    }
    const auto value = [&]() {
      if (params.value_kind == "uniform") return val_eng.next_uniform();
      if (params.value_kind == "gamma")
        return sample_gamma(val_eng, params.gamma_shape, params.gamma_scale);
      throw std::invalid_argument("generate_pair: unknown value_kind '" + params.value_kind + "'");
    };
    std::vector<std::uint32_t> xi, yi;
    std::vector<double> xv, yv;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < novl; ++i, ++pos) {
      const double a = value();
      const double b = params.identical_values ? a : value();
      xi.push_back(static_cast<std::uint32_t>(perm[pos]));
      xv.push_back(a);
      yi.push_back(static_cast<std::uint32_t>(perm[pos]));
      yv.push_back(b);
    }
    for (std::size_t i = 0; i < n1 - novl; ++i, ++pos) {
      xi.push_back(static_cast<std::uint32_t>(perm[pos]));
      xv.push_back(value());
    }
    for (std::size_t i = 0; i < n2 - novl; ++i, ++pos) {
      yi.push_back(static_cast<std::uint32_t>(perm[pos]));
      yv.push_back(value());
    }
    return {sparse_from_unsorted(dim, std::move(xi), std::move(xv)),
            sparse_from_unsorted(dim, std::move(yi), std::move(yv))};
  }
  throw std::invalid_argument("generate_pair: unknown kind '" + kind + "'");
}

namespace {

enum class Family { sampling, one3, three3, d6, exact_only, crs_only };

struct EstimatorInfo {
  Family family;
  int p;
};

EstimatorInfo estimator_info(const std::string& id) {
  if (id == "sampling") return {Family::sampling, 4};
  if (id == "crs-var-only") return {Family::crs_only, 4};
  if (id == "1p" || id == "1p-m" || id == "1p-i") return {Family::one3, 4};
  if (id == "3p" || id == "3p-m") return {Family::three3, 4};
  if (id == "d6-1p") return {Family::d6, 6};
  if (id == "exact") return {Family::exact_only, 4};
  throw std::invalid_argument("run_mse: unknown estimator id '" + id + "'");
}

double eval_sketch_estimator(const std::string& id, const Sketch& sx, const Sketch& sy) {
  if (id == "1p") return est_1p(sx, sy).value;
  if (id == "1p-m") return est_1p_margin(sx, sy).value;
  if (id == "1p-i") return est_1p_identity(sx, sy).value;
  if (id == "3p") return est_3p(sx, sy).value;
  if (id == "3p-m") return est_3p_margin(sx, sy).value;
  if (id == "d6-1p") return est_d6_1p(sx, sy).value;
  throw std::logic_error("eval_sketch_estimator: bad id");
}

std::optional<double> theoretical_var(const std::string& id, const MomentTable& mt,
                                      std::uint32_t k) {
  if (id == "sampling") return var_sampling(mt, k);
  if (id == "crs-var-only") return var_crs_predictor(mt, k);
  if (id == "3p") return var_3p(mt, k);
  if (id == "3p-m") return var_3p_margin_asymptotic(mt, k);
  if (id == "1p") return var_1p(mt, k);
  if (id == "1p-i") return var_1p_identity(mt, k);
  return std::nullopt;  // 1p-m, exact, d6-1p have no closed form here
}

void run_trial_range(const ExperimentSpec& spec, Family family, std::uint32_t k,
                     const std::vector<std::string>& members,
                     std::vector<std::vector<double>>& values, std::uint32_t lo,
                     std::uint32_t hi) {
  const std::size_t dim = spec.x.dim();
  for (std::uint32_t t = lo; t < hi; ++t) {
    const std::uint64_t seed_t = kernels::derive_seed(spec.master_seed, t);
    if (family == Family::sampling) {
      const double v = est_sampling(spec.x, spec.y, k, seed_t).value;
      for (std::size_t m = 0; m < members.size(); ++m) values[m][t] = v;
      continue;
    }
    const Scheme scheme =
        family == Family::three3 ? Scheme::three_matrix : Scheme::one_matrix;
    const int max_power = family == Family::d6 ? 5 : 3;
    const Role ry = family == Family::three3 ? Role::right : Role::left;
    ProjectionSpec ps{seed_t, k, scheme, spec.dist, dim};
    const Sketch sx = sketch_vector(spec.x, ps, max_power, Role::left);
    const Sketch sy = sketch_vector(spec.y, ps, max_power, ry);
    for (std::size_t m = 0; m < members.size(); ++m)
      values[m][t] = eval_sketch_estimator(members[m], sx, sy);
  }
}

}  // namespace

std::vector<MseRow> run_mse(const ExperimentSpec& spec) {
  if (spec.x.dim() != spec.y.dim())
    throw std::invalid_argument("run_mse: pair dimensions differ");
  if (spec.k_grid.empty()) throw std::invalid_argument("run_mse: empty k grid");
  for (std::size_t i = 0; i < spec.k_grid.size(); ++i) {
    if (spec.k_grid[i] < 1 || (i > 0 && spec.k_grid[i] <= spec.k_grid[i - 1]))
      throw std::invalid_argument("run_mse: k grid must be strictly increasing and positive");
  }
  if (spec.trials < 100) throw std::invalid_argument("run_mse: trials must be >= 100");
  if (spec.estimators.empty()) throw std::invalid_argument("run_mse: no estimators requested");
  for (const auto& id : spec.estimators) estimator_info(id);

  const MomentTable mt = compute_moments(spec.x, spec.y);
  const double d4 = mt.diff_pow(4);
  const double d6 = mt.diff_pow(6);

  unsigned nthreads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads, spec.trials);

  // Estimators in the same family share per-trial sketches; results are keyed
  // by (id, k) and emitted in the requested order afterwards.
  struct Stats {
    double mse = 0.0;
    double bias_sq = 0.0;
  };
  std::vector<std::pair<Family, std::vector<std::string>>> groups;
  for (const auto& id : spec.estimators) {
    const Family fam = estimator_info(id).family;
    if (fam == Family::crs_only || fam == Family::exact_only) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [fam](const auto& g) { return g.first == fam; });
    if (it == groups.end()) {
      groups.push_back({fam, {id}});
    } else if (std::find(it->second.begin(), it->second.end(), id) == it->second.end()) {
      it->second.push_back(id);
    }
  }

  std::vector<std::pair<std::pair<std::string, std::uint32_t>, Stats>> computed;
  for (const auto& [family, members] : groups) {
    const double d = family == Family::d6 ? d6 : d4;
    for (const std::uint32_t k : spec.k_grid) {
      std::vector<std::vector<double>> values(members.size(),
                                              std::vector<double>(spec.trials));
      if (nthreads <= 1) {
        run_trial_range(spec, family, k, members, values, 0, spec.trials);
      } else {
        std::vector<std::thread> pool;
        const std::uint32_t chunk = (spec.trials + nthreads - 1) / nthreads;
        for (unsigned w = 0; w < nthreads; ++w) {
          const std::uint32_t lo = w * chunk;
          const std::uint32_t hi = std::min(spec.trials, lo + chunk);
          if (lo >= hi) break;
          pool.emplace_back([&, lo, hi] {
            run_trial_range(spec, family, k, members, values, lo, hi);
          });
        }
        for (auto& th : pool) th.join();
      }
      for (std::size_t m = 0; m < members.size(); ++m) {
        CompensatedSum sq_err, mean_sum;
        for (std::uint32_t t = 0; t < spec.trials; ++t) {
          const double e = values[m][t] - d;
          sq_err.add(e * e);
          mean_sum.add(values[m][t]);
        }
        const double raw_mse = sq_err.value() / static_cast<double>(spec.trials);
        const double bias = mean_sum.value() / static_cast<double>(spec.trials) - d;
        Stats st;
        if (d == 0.0) {
          if (raw_mse != 0.0) throw std::domain_error("run_mse: zero true distance");
        } else {
          st.mse = raw_mse / (d * d);
          st.bias_sq = bias * bias / (d * d);
        }
        computed.push_back({{members[m], k}, st});
      }
    }
  }

  std::vector<MseRow> rows;
  for (const auto& id : spec.estimators) {
    const EstimatorInfo info = estimator_info(id);
    const double d = info.p == 6 ? d6 : d4;
    for (const std::uint32_t k : spec.k_grid) {
      MseRow row;
      row.estimator_id = id;
      row.k = k;

      const std::optional<double> var = theoretical_var(id, mt, k);
      if (var) {
        if (d != 0.0)
          row.theoretical_norm_var = *var / (d * d);
        else if (*var == 0.0)
          row.theoretical_norm_var = 0.0;
        else
          throw std::domain_error("run_mse: zero true distance");
      }

      if (info.family == Family::crs_only) {
        row.trials = 0;
      } else if (info.family == Family::exact_only) {
        row.trials = spec.trials;
        row.empirical_mse = 0.0;
        row.bias_sq_norm = 0.0;
      } else {
        row.trials = spec.trials;
        const auto it = std::find_if(computed.begin(), computed.end(), [&](const auto& e) {
          return e.first.first == id && e.first.second == k;
        });
        row.empirical_mse = it->second.mse;
        row.bias_sq_norm = it->second.bias_sq;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace lpsketch
