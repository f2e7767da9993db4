#include "lpsketch/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "lpsketch/estimators.hpp"
#include "lpsketch/kernels.hpp"
#include "lpsketch/moments.hpp"

namespace lpsketch {

namespace {

unsigned resolve_threads(int threads, std::size_t work) {
  unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

template <class F>
void parallel_for(std::size_t n, unsigned nthreads, F f) {
  if (nthreads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (unsigned w = 0; w < nthreads; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

void validate_dataset(const LabeledDataset& ds) {
  if (ds.rows.size() != ds.labels.size())
    throw std::invalid_argument("knn: rows and labels sizes differ");
  if (ds.train_idx.empty()) throw std::invalid_argument("knn: empty train set");
  std::vector<char> seen(ds.rows.size(), 0);
  for (const std::size_t i : ds.train_idx) {
    if (i >= ds.rows.size()) throw std::invalid_argument("knn: train index out of range");
    if (seen[i]) throw std::invalid_argument("knn: duplicate train index");
    seen[i] = 1;
  }
  for (const std::size_t i : ds.test_idx) {
    if (i >= ds.rows.size()) throw std::invalid_argument("knn: test index out of range");
    if (seen[i] == 1) throw std::invalid_argument("knn: train and test sets overlap");
    if (seen[i] == 2) throw std::invalid_argument("knn: duplicate test index");
    seen[i] = 2;
  }
  if (!ds.rows.empty()) {
    const std::size_t dim = ds.rows.front().dim();
    for (const auto& r : ds.rows)
      if (r.dim() != dim) throw std::invalid_argument("knn: rows have differing dimensions");
  }
}

// Majority vote over the m nearest candidates; ties by smaller summed
// distance, then by lower class id. Candidates are (distance, label).
int predict(std::vector<std::pair<double, int>>& cand, std::uint32_t m) {
  std::sort(cand.begin(), cand.end());
  struct Tally {
    int count = 0;
    double sum = 0.0;
  };
  std::map<int, Tally> tally;
  for (std::uint32_t i = 0; i < m; ++i) {
    Tally& t = tally[cand[i].second];
    t.count += 1;
    t.sum += cand[i].first;
  }
  int best_label = tally.begin()->first;
  Tally best = tally.begin()->second;
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const Tally& t = it->second;
    if (t.count > best.count || (t.count == best.count && t.sum < best.sum)) {
      best_label = it->first;
      best = t;
    }
  }
  return best_label;
}

bool is_sketch_estimator(const std::string& id) {
  return id == "3p" || id == "3p-m" || id == "1p" || id == "1p-m" || id == "1p-i" ||
         id == "d6-1p";
}

double run_repeat(const LabeledDataset& ds, std::uint32_t m, int p,
                  const DistanceSource& source, std::uint64_t seed, unsigned nthreads) {
  const std::string& id = source.estimator_id;
  const std::size_t ntest = ds.test_idx.size();
  const std::size_t ntrain = ds.train_idx.size();
  std::vector<char> wrong(ntest, 0);

  std::vector<Sketch> sketches;
  if (is_sketch_estimator(id)) {
    const bool three = id == "3p" || id == "3p-m";
    const Scheme scheme = three ? Scheme::three_matrix : Scheme::one_matrix;
    const int max_power = id == "d6-1p" ? 5 : 3;
    const ProjectionSpec ps{seed, source.k, scheme, source.dist,
                            ds.rows.empty() ? 0 : ds.rows.front().dim()};
    sketches.resize(ds.rows.size());
    std::vector<std::size_t> need;
    need.insert(need.end(), ds.test_idx.begin(), ds.test_idx.end());
    need.insert(need.end(), ds.train_idx.begin(), ds.train_idx.end());
    const std::size_t split = ds.test_idx.size();
    parallel_for(need.size(), nthreads, [&](std::size_t i) {
      const Role role = (three && i >= split) ? Role::right : Role::left;
      sketches[need[i]] = sketch_vector(ds.rows[need[i]], ps, max_power, role);
    });
  }

  parallel_for(ntest, nthreads, [&](std::size_t ti) {
    const std::size_t test_row = ds.test_idx[ti];
    std::vector<std::pair<double, int>> cand(ntrain);
    for (std::size_t tj = 0; tj < ntrain; ++tj) {
      const std::size_t train_row = ds.train_idx[tj];
      double dist;
      if (id == "exact") {
        dist = exact_lp(ds.rows[test_row], ds.rows[train_row], p);
      } else if (id == "sampling") {
        dist = est_sampling(ds.rows[test_row], ds.rows[train_row], source.k, seed).value;
      } else if (id == "3p") {
        dist = est_3p(sketches[test_row], sketches[train_row]).value;
      } else if (id == "3p-m") {
        dist = est_3p_margin(sketches[test_row], sketches[train_row]).value;
      } else if (id == "1p") {
        dist = est_1p(sketches[test_row], sketches[train_row]).value;
      } else if (id == "1p-m") {
        dist = est_1p_margin(sketches[test_row], sketches[train_row]).value;
      } else if (id == "1p-i") {
        dist = est_1p_identity(sketches[test_row], sketches[train_row]).value;
      } else {
        dist = est_d6_1p(sketches[test_row], sketches[train_row]).value;
      }
      cand[tj] = {dist, ds.labels[train_row]};
    }
    wrong[ti] = predict(cand, m) != ds.labels[test_row] ? 1 : 0;
  });

  std::size_t miss = 0;
  for (const char w : wrong) miss += w;
  return ntest == 0 ? 0.0 : static_cast<double>(miss) / static_cast<double>(ntest);
}

}  // namespace

KnnResult knn_classify(const LabeledDataset& ds, std::uint32_t m, int p,
                       const DistanceSource& source, int threads) {
  validate_dataset(ds);
  if (m < 1) throw std::invalid_argument("knn: m must be >= 1");
  if (m > ds.train_idx.size())
    throw std::invalid_argument("knn: m exceeds the training set size");

  const std::string& id = source.estimator_id;
  const bool exact = id == "exact";
  if (exact) {
    if (p != 2 && p != 4 && p != 6 && p != 8)
      throw std::invalid_argument("knn: exact distance order must be even in 2..8");
  } else {
    if (id != "sampling" && !is_sketch_estimator(id))
      throw std::invalid_argument("knn: unknown distance source '" + id + "'");
    const int ep = id == "d6-1p" ? 6 : 4;
    if (p != ep)
      throw std::invalid_argument("knn: distance order does not match the estimator");
    if (source.k < 1) throw std::invalid_argument("knn: estimator needs k >= 1");
  }

  const std::uint32_t repeats = exact ? 1 : std::max<std::uint32_t>(1, source.repeats);
  const unsigned nthreads = resolve_threads(threads, ds.test_idx.size());

  KnnResult res;
  res.m = m;
  res.p = p;
  res.distance_source = id;
  res.k = exact ? 0 : source.k;
  res.seed_repeats = repeats;
  for (std::uint32_t rep = 0; rep < repeats; ++rep) {
    const std::uint64_t seed_r = kernels::derive_seed(source.seed, rep);
    res.per_repeat.push_back(run_repeat(ds, m, p, source, seed_r, nthreads));
  }
  double mean = 0.0;
  for (const double e : res.per_repeat) mean += e;
  mean /= static_cast<double>(repeats);
  res.mean_error = mean;
  if (repeats > 1) {
    double ss = 0.0;
    for (const double e : res.per_repeat) ss += (e - mean) * (e - mean);
    res.std_error = std::sqrt(ss / static_cast<double>(repeats - 1)) /
                    std::sqrt(static_cast<double>(repeats));
  }
  return res;
}

std::vector<KnnResult> p_sweep(const LabeledDataset& ds,
                               const std::vector<std::uint32_t>& m_list,
                               const std::vector<int>& p_list, int threads) {
  if (m_list.empty() || p_list.empty())
    throw std::invalid_argument("p_sweep: empty m or p list");
  std::vector<KnnResult> out;
  DistanceSource exact;
  for (const int p : p_list)
    for (const std::uint32_t m : m_list) out.push_back(knn_classify(ds, m, p, exact, threads));
  return out;
}

}  // namespace lpsketch
