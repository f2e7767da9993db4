#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpsketch/estimators.hpp"
#include "lpsketch/io.hpp"
#include "lpsketch/moments.hpp"
#include "lpsketch/simlab.hpp"
#include "lpsketch/verify.hpp"

namespace {

using namespace lpsketch;

// Flag combinations the parser cannot catch; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const CLI::App& cmd, std::uint64_t flag_value) {
  if (cmd.count("--seed") > 0) return flag_value;
  if (const char* env = std::getenv("LPSKETCH_SEED")) {
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(env, &end, 10);
    if (*env == '\0' || end == nullptr || *end != '\0')
      throw UsageError(std::string("invalid LPSKETCH_SEED value '") + env + "'");
    return v;
  }
  return flag_value;
}

Distribution dist_from(const std::string& token) {
  try {
    return Distribution::parse(token);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw DataError(path + ": cannot open for writing");
  fn(os);
  os.flush();
  if (!os) throw DataError(path + ": write failed");
}

DatasetFile make_dataset(const std::string& path, const std::string& format,
                         std::size_t dim, bool labeled) {
  DatasetFile f;
  f.path = path;
  f.format = format;
  f.dim = dim;
  f.labeled = labeled;
  return f;
}

DataVector load_single(const std::string& path, const std::string& format,
                       std::size_t dim) {
  auto rows = load_vectors(make_dataset(path, format, dim, false));
  return rows.front();
}

struct EstimatorTraits {
  Scheme scheme;
  int max_power;
  int p;
};

EstimatorTraits sketch_traits(const std::string& id) {
  if (id == "3p" || id == "3p-m") return {Scheme::three_matrix, 3, 4};
  if (id == "d6-1p") return {Scheme::one_matrix, 5, 6};
  return {Scheme::one_matrix, 3, 4};
}

Estimate run_sketch_estimator(const std::string& id, const Sketch& sx, const Sketch& sy,
                              const MomentTable* m, double tau) {
  if (id == "3p") return est_3p(sx, sy, m);
  if (id == "3p-m") return est_3p_margin(sx, sy, m);
  if (id == "1p") return est_1p(sx, sy, m);
  if (id == "1p-m") return est_1p_margin(sx, sy);
  if (id == "1p-i") return est_1p_identity(sx, sy, m);
  if (id == "d6-1p") return est_d6_1p(sx, sy);
  return select_estimator(sx, sy, tau);
}

struct MomentsArgs {
  std::string x_path, y_path, out;
  std::string format = "dense-csv";
  std::size_t dim = 0;
};

int cmd_moments(const MomentsArgs& a) {
  const DataVector x = load_single(a.x_path, a.format, a.dim);
  const DataVector y = load_single(a.y_path, a.format, a.dim);
  if (x.dim() != y.dim())
    throw DataError("x and y dimensions differ (" + std::to_string(x.dim()) + " vs " +
                    std::to_string(y.dim()) + ")");
  const MomentTable m = compute_moments(x, y);
  with_output(a.out, [&](std::ostream& os) { write_moments_csv(os, m); });
  return 0;
}

struct SketchArgs {
  std::string input, out;
  std::string format = "dense-csv";
  std::size_t dim = 0;
  bool labeled = false;
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  std::string scheme = "1p";
  std::string dist = "normal";
  int max_power = 3;
  std::string role = "left";
};

int cmd_sketch(const CLI::App& cmd, SketchArgs& a) {
  a.seed = resolve_seed(cmd, a.seed);
  const Scheme scheme = a.scheme == "3p" ? Scheme::three_matrix : Scheme::one_matrix;
  if (scheme == Scheme::three_matrix && a.max_power != 3)
    throw UsageError("--scheme 3p requires --maxpower 3");
  const Role role = a.role == "right" ? Role::right : Role::left;

  const auto rows = load_vectors(make_dataset(a.input, a.format, a.dim, a.labeled));
  ProjectionSpec spec;
  spec.seed = a.seed;
  spec.k = a.k;
  spec.scheme = scheme;
  spec.dist = dist_from(a.dist);
  spec.dim = rows.front().dim();

  std::vector<Sketch> sketches;
  sketches.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    sketches.push_back(sketch_vector(rows[i], spec, a.max_power, role, std::to_string(i)));
  save_sketches(a.out, sketches);
  return 0;
}

struct EstimateArgs {
  std::string estimator;
  std::string x_path, y_path, sx_path, sy_path, out;
  std::string format = "dense-csv";
  std::size_t dim = 0;
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  int p = 0;
  double tau = 0.9;
  std::string dist = "normal";
};

int cmd_estimate(const CLI::App& cmd, EstimateArgs& a) {
  const bool raw = !a.x_path.empty() || !a.y_path.empty();
  const bool from_sketches = !a.sx_path.empty() || !a.sy_path.empty();
  if (raw == from_sketches)
    throw UsageError("provide either --x/--y data files or --sx/--sy sketch files");
  if (raw && (a.x_path.empty() || a.y_path.empty()))
    throw UsageError("--x and --y are both required");
  if (from_sketches && (a.sx_path.empty() || a.sy_path.empty()))
    throw UsageError("--sx and --sy are both required");

  const bool raw_only = a.estimator == "exact" || a.estimator == "sampling";
  if (raw_only && !raw)
    throw UsageError("--estimator " + a.estimator + " needs raw data (--x/--y)");

  const int implied_p = a.estimator == "exact" ? (a.p == 0 ? 4 : a.p)
                                               : sketch_traits(a.estimator).p;
  if (a.p != 0 && a.p != implied_p)
    throw UsageError("--p " + std::to_string(a.p) + " conflicts with --estimator " +
                     a.estimator);

  Estimate est;
  if (a.estimator == "exact") {
    const DataVector x = load_single(a.x_path, a.format, a.dim);
    const DataVector y = load_single(a.y_path, a.format, a.dim);
    est = est_exact(x, y, implied_p);
  } else if (a.estimator == "sampling") {
    if (cmd.count("--k") == 0) throw UsageError("--estimator sampling requires --k");
    const DataVector x = load_single(a.x_path, a.format, a.dim);
    const DataVector y = load_single(a.y_path, a.format, a.dim);
    est = est_sampling(x, y, a.k, resolve_seed(cmd, a.seed));
  } else if (raw) {
    if (cmd.count("--k") == 0)
      throw UsageError("--estimator " + a.estimator + " requires --k with raw data");
    const DataVector x = load_single(a.x_path, a.format, a.dim);
    const DataVector y = load_single(a.y_path, a.format, a.dim);
    const EstimatorTraits t = sketch_traits(a.estimator);
    ProjectionSpec spec;
    spec.seed = resolve_seed(cmd, a.seed);
    spec.k = a.k;
    spec.scheme = t.scheme;
    spec.dist = dist_from(a.dist);
    spec.dim = x.dim();
    const Sketch sx = sketch_vector(x, spec, t.max_power, Role::left, "x");
    const Sketch sy = sketch_vector(y, spec, t.max_power, Role::right, "y");
    const MomentTable m = compute_moments(x, y);
    est = run_sketch_estimator(a.estimator, sx, sy, &m, a.tau);
  } else {
    const auto sxs = load_sketches(a.sx_path, Role::left);
    const auto sys = load_sketches(a.sy_path, Role::right);
    est = run_sketch_estimator(a.estimator, sxs.front(), sys.front(), nullptr, a.tau);
  }

  with_output(a.out, [&](std::ostream& os) { write_estimate_csv(os, est); });
  return 0;
}

struct MseArgs {
  std::string config, out;
  std::string x_path, y_path;
  std::string format = "dense-csv";
  std::size_t file_dim = 0;
  std::string pair_kind;
  std::size_t dim = 0;
  std::uint64_t pair_seed = 1;
  PairParams pp;
  std::vector<std::uint32_t> k_grid;
  std::uint32_t trials = 1000;
  std::vector<std::string> estimators;
  std::string dist = "normal";
  std::uint64_t seed = 0;
  bool seed_from_config = false;
  int threads = 0;
};

void apply_mse_config(const std::string& path, MseArgs& a) {
  std::ifstream is(path);
  if (!is) throw DataError(path + ": cannot open file");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "pair") {
        for (const auto& [pk, pv] : val.items()) {
          if (pk == "kind") a.pair_kind = pv.get<std::string>();
          else if (pk == "dim") a.dim = pv.get<std::size_t>();
          else if (pk == "seed") a.pair_seed = pv.get<std::uint64_t>();
          else if (pk == "noise") a.pp.pair_noise = pv.get<double>();
          else if (pk == "gamma_shape") a.pp.gamma_shape = pv.get<double>();
          else if (pk == "gamma_scale") a.pp.gamma_scale = pv.get<double>();
          else if (pk == "beta_a") a.pp.beta_a = pv.get<double>();
          else if (pk == "beta_b") a.pp.beta_b = pv.get<double>();
          else if (pk == "sparsity1") a.pp.sparsity1 = pv.get<double>();
          else if (pk == "sparsity2") a.pp.sparsity2 = pv.get<double>();
          else if (pk == "overlap") a.pp.overlap = pv.get<double>();
          else if (pk == "value_kind") a.pp.value_kind = pv.get<std::string>();
          else if (pk == "identical_values") a.pp.identical_values = pv.get<bool>();
          else throw DataError(path + ": unknown pair key '" + pk + "'");
        }
      } else if (key == "x") a.x_path = val.get<std::string>();
      else if (key == "y") a.y_path = val.get<std::string>();
      else if (key == "format") a.format = val.get<std::string>();
      else if (key == "file_dim") a.file_dim = val.get<std::size_t>();
      else if (key == "k") a.k_grid = val.get<std::vector<std::uint32_t>>();
      else if (key == "trials") a.trials = val.get<std::uint32_t>();
      else if (key == "estimators") a.estimators = val.get<std::vector<std::string>>();
      else if (key == "dist") a.dist = val.get<std::string>();
      else if (key == "seed") {
        a.seed = val.get<std::uint64_t>();
        a.seed_from_config = true;
      } else if (key == "threads") a.threads = val.get<int>();
      else throw DataError(path + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

int cmd_mse(const CLI::App& cmd, MseArgs& a) {
  if (!a.config.empty()) {
    // Flags given alongside --config override its values.
    MseArgs flags = a;
    apply_mse_config(a.config, a);
    if (cmd.count("--x")) a.x_path = flags.x_path;
    if (cmd.count("--y")) a.y_path = flags.y_path;
    if (cmd.count("--format")) a.format = flags.format;
    if (cmd.count("--file-dim")) a.file_dim = flags.file_dim;
    if (cmd.count("--pair-kind")) a.pair_kind = flags.pair_kind;
    if (cmd.count("--dim")) a.dim = flags.dim;
    if (cmd.count("--pair-seed")) a.pair_seed = flags.pair_seed;
    if (cmd.count("--pair-noise")) a.pp.pair_noise = flags.pp.pair_noise;
    if (cmd.count("--gamma-shape")) a.pp.gamma_shape = flags.pp.gamma_shape;
    if (cmd.count("--gamma-scale")) a.pp.gamma_scale = flags.pp.gamma_scale;
    if (cmd.count("--beta-a")) a.pp.beta_a = flags.pp.beta_a;
    if (cmd.count("--beta-b")) a.pp.beta_b = flags.pp.beta_b;
    if (cmd.count("--sparsity1")) a.pp.sparsity1 = flags.pp.sparsity1;
    if (cmd.count("--sparsity2")) a.pp.sparsity2 = flags.pp.sparsity2;
    if (cmd.count("--overlap")) a.pp.overlap = flags.pp.overlap;
    if (cmd.count("--value-kind")) a.pp.value_kind = flags.pp.value_kind;
    if (cmd.count("--identical-values")) a.pp.identical_values = flags.pp.identical_values;
    if (cmd.count("--k")) a.k_grid = flags.k_grid;
    if (cmd.count("--trials")) a.trials = flags.trials;
    if (cmd.count("--estimators")) a.estimators = flags.estimators;
    if (cmd.count("--dist")) a.dist = flags.dist;
    if (cmd.count("--seed")) a.seed = flags.seed;
    if (cmd.count("--threads")) a.threads = flags.threads;
  }
  if (cmd.count("--seed") == 0 && !a.seed_from_config) a.seed = resolve_seed(cmd, a.seed);

  ExperimentSpec spec;
  const bool from_files = !a.x_path.empty() || !a.y_path.empty();
  if (from_files) {
    if (a.x_path.empty() || a.y_path.empty())
      throw UsageError("--x and --y are both required");
    spec.x = load_single(a.x_path, a.format, a.file_dim);
    spec.y = load_single(a.y_path, a.format, a.file_dim);
  } else {
    if (a.pair_kind.empty() || a.dim == 0)
      throw UsageError("give --x/--y files or --pair-kind with --dim");
    auto pair = generate_pair(a.pair_kind, a.pp, a.dim, a.pair_seed);
    spec.x = std::move(pair.first);
    spec.y = std::move(pair.second);
  }
  if (a.k_grid.empty()) throw UsageError("--k grid is required");
  if (a.estimators.empty()) throw UsageError("--estimators is required");
  spec.k_grid = a.k_grid;
  spec.trials = a.trials;
  spec.estimators = a.estimators;
  spec.dist = dist_from(a.dist);
  spec.master_seed = a.seed;
  spec.threads = a.threads;

  const auto rows = run_mse(spec);
  with_output(a.out, [&](std::ostream& os) { write_mse_csv(os, rows); });
  return 0;
}

struct KnnArgs {
  std::string input, out;
  std::string format = "dense-csv";
  std::size_t dim = 0;
  bool synthetic = false;
  std::size_t classes = 3;
  std::size_t per_class = 50;
  double spread = 3.0;
  std::uint64_t data_seed = 1;
  std::size_t train = 0;
  std::vector<std::uint32_t> m_list{1, 3, 5};
  std::vector<int> p_list{4};
  std::string source = "exact";
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  std::uint32_t repeats = 1;
  std::string dist = "normal";
  int threads = 0;
};

LabeledDataset make_blobs(std::size_t classes, std::size_t per_class, std::size_t dim,
                          double spread, std::uint64_t seed) {
  if (classes < 2 || per_class == 0 || dim == 0)
    throw UsageError("--synthetic needs --classes >= 2, --per-class >= 1, --dim >= 1");
  PhiloxEngine eng(seed, 20);
  LabeledDataset ds;
  const std::size_t total = classes * per_class;
  ds.rows.reserve(total);
  ds.labels.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t c = i % classes;
    std::vector<double> vals(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      vals[j] = eng.next_normal();
      if (j % classes == c) vals[j] += spread;
    }
    ds.rows.push_back(DataVector::dense(std::move(vals)));
    ds.labels.push_back(static_cast<int>(c));
  }
  return ds;
}

int cmd_knn(const CLI::App& cmd, KnnArgs& a) {
  if (!a.synthetic && a.input.empty()) throw UsageError("provide --input or --synthetic");
  if (a.synthetic && !a.input.empty())
    throw UsageError("--input and --synthetic are mutually exclusive");

  LabeledDataset ds =
      a.synthetic
          ? make_blobs(a.classes, a.per_class, a.dim, a.spread, a.data_seed)
          : load_labeled(make_dataset(a.input, a.format, a.dim, a.format == "dense-csv"));

  if (a.train == 0) throw UsageError("--train is required (number of training rows)");
  if (a.train >= ds.rows.size())
    throw DataError("--train " + std::to_string(a.train) + " leaves no test rows (" +
                    std::to_string(ds.rows.size()) + " total)");
  for (std::size_t i = 0; i < ds.rows.size(); ++i)
    (i < a.train ? ds.train_idx : ds.test_idx).push_back(i);

  DistanceSource src;
  src.estimator_id = a.source;
  src.k = a.k;
  src.seed = resolve_seed(cmd, a.seed);
  src.repeats = a.repeats;
  src.dist = dist_from(a.dist);
  if (a.source != "exact" && cmd.count("--k") == 0)
    throw UsageError("--source " + a.source + " requires --k");

  std::vector<KnnResult> results;
  for (const std::uint32_t m : a.m_list)
    for (const int p : a.p_list) results.push_back(knn_classify(ds, m, p, src, a.threads));
  with_output(a.out, [&](std::ostream& os) { write_knn_csv(os, results); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lp distance sketching: estimators, Monte-Carlo lab, k-NN harness"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  const std::vector<std::string> estimator_ids{"sampling", "3p",   "3p-m", "1p",   "1p-m",
                                               "1p-i",     "auto", "exact", "d6-1p"};
  const std::vector<std::string> formats{"dense-csv", "svmlight"};

  MomentsArgs mo;
  auto* c_mo = app.add_subcommand("moments", "Exact moment table for a vector pair");
  c_mo->add_option("--x", mo.x_path, "dataset file holding x (first row)")->required();
  c_mo->add_option("--y", mo.y_path, "dataset file holding y (first row)")->required();
  c_mo->add_option("--format", mo.format)->check(CLI::IsMember(formats));
  c_mo->add_option("--dim", mo.dim, "dimension (required for svmlight)");
  c_mo->add_option("--out", mo.out, "output CSV path (default stdout)");

  SketchArgs sk;
  auto* c_sk = app.add_subcommand("sketch", "Project a dataset and write a sketch file");
  c_sk->add_option("--input", sk.input, "dataset file, one vector per row")->required();
  c_sk->add_option("--format", sk.format)->check(CLI::IsMember(formats));
  c_sk->add_option("--dim", sk.dim, "dimension (required for svmlight)");
  c_sk->add_flag("--labeled", sk.labeled, "dense-csv rows start with a label column");
  c_sk->add_option("-k,--k", sk.k, "projections per power")->required()->check(CLI::PositiveNumber);
  c_sk->add_option("--seed", sk.seed, "projection seed (or LPSKETCH_SEED)");
  c_sk->add_option("--scheme", sk.scheme, "1p: one matrix, 3p: independent matrix per power")
      ->check(CLI::IsMember({"1p", "3p"}));
  c_sk->add_option("--dist", sk.dist, "normal | 3pt | sparse:<s>");
  c_sk->add_option("--maxpower", sk.max_power, "highest projected power (5 enables d6-1p)")
      ->check(CLI::IsMember({3, 5}));
  c_sk->add_option("--role", sk.role, "3p routing side; estimate reads --sx as left, --sy as right")
      ->check(CLI::IsMember({"left", "right"}));
  c_sk->add_option("--out", sk.out, "sketch file path")->required();

  EstimateArgs es;
  auto* c_es = app.add_subcommand("estimate", "Estimate the lp distance of one pair");
  c_es->add_option("--estimator", es.estimator)->required()->check(CLI::IsMember(estimator_ids));
  c_es->add_option("--x", es.x_path, "dataset file holding x (first row)");
  c_es->add_option("--y", es.y_path, "dataset file holding y (first row)");
  c_es->add_option("--sx", es.sx_path, "sketch file for x (first sketch, left role)");
  c_es->add_option("--sy", es.sy_path, "sketch file for y (first sketch, right role)");
  c_es->add_option("--format", es.format)->check(CLI::IsMember(formats));
  c_es->add_option("--dim", es.dim, "dimension (required for svmlight)");
  c_es->add_option("-k,--k", es.k, "projections or samples")->check(CLI::PositiveNumber);
  c_es->add_option("--seed", es.seed, "seed (or LPSKETCH_SEED)");
  c_es->add_option("--p", es.p, "distance order (exact only; others imply it)")
      ->check(CLI::IsMember({4, 6}));
  c_es->add_option("--tau", es.tau, "beta4 threshold for --estimator auto (experimental)");
  c_es->add_option("--dist", es.dist, "normal | 3pt | sparse:<s>");
  c_es->add_option("--out", es.out, "output CSV path (default stdout)");

  MseArgs ms;
  auto* c_ms = app.add_subcommand("mse", "Monte-Carlo MSE vs theoretical variance");
  c_ms->add_option("--config", ms.config, "JSON config; flags override its entries");
  c_ms->add_option("--x", ms.x_path, "dataset file holding x (first row)");
  c_ms->add_option("--y", ms.y_path, "dataset file holding y (first row)");
  c_ms->add_option("--format", ms.format)->check(CLI::IsMember(formats));
  c_ms->add_option("--file-dim", ms.file_dim, "dimension for svmlight inputs");
  c_ms->add_option("--pair-kind", ms.pair_kind, "gamma | beta | sparse-overlap")
      ->check(CLI::IsMember({"gamma", "beta", "sparse-overlap"}));
  c_ms->add_option("--dim", ms.dim, "synthetic pair dimension");
  c_ms->add_option("--pair-seed", ms.pair_seed, "seed for the synthetic pair");
  c_ms->add_option("--pair-noise", ms.pp.pair_noise, "0: identical pair, 1: independent");
  c_ms->add_option("--gamma-shape", ms.pp.gamma_shape);
  c_ms->add_option("--gamma-scale", ms.pp.gamma_scale);
  c_ms->add_option("--beta-a", ms.pp.beta_a);
  c_ms->add_option("--beta-b", ms.pp.beta_b);
  c_ms->add_option("--sparsity1", ms.pp.sparsity1, "nonzero fraction of x");
  c_ms->add_option("--sparsity2", ms.pp.sparsity2, "nonzero fraction of y");
  c_ms->add_option("--overlap", ms.pp.overlap, "shared fraction of the smaller support");
  c_ms->add_option("--value-kind", ms.pp.value_kind)->check(CLI::IsMember({"gamma", "uniform"}));
  c_ms->add_flag("--identical-values", ms.pp.identical_values,
                 "shared support carries equal values");
  c_ms->add_option("-k,--k", ms.k_grid, "sketch size grid, strictly increasing");
  c_ms->add_option("--trials", ms.trials, "Monte-Carlo trials (>= 100)");
  c_ms->add_option("--estimators", ms.estimators,
                   "any of sampling crs-var-only 3p 3p-m 1p 1p-m 1p-i exact d6-1p");
  c_ms->add_option("--dist", ms.dist, "normal | 3pt | sparse:<s>");
  c_ms->add_option("--seed", ms.seed, "master seed (or LPSKETCH_SEED)");
  c_ms->add_option("--threads", ms.threads, "worker threads (0 = hardware)");
  c_ms->add_option("--out", ms.out, "output CSV path (default stdout)");

  KnnArgs kn;
  auto* c_kn = app.add_subcommand("knn", "k-NN error rates under exact or estimated distances");
  c_kn->add_option("--input", kn.input, "labeled dataset file");
  c_kn->add_option("--format", kn.format)->check(CLI::IsMember(formats));
  c_kn->add_option("--dim", kn.dim, "dimension (svmlight and --synthetic)");
  c_kn->add_flag("--synthetic", kn.synthetic, "Gaussian blobs instead of --input");
  c_kn->add_option("--classes", kn.classes, "blob classes");
  c_kn->add_option("--per-class", kn.per_class, "rows per class");
  c_kn->add_option("--spread", kn.spread, "blob center offset");
  c_kn->add_option("--data-seed", kn.data_seed, "blob noise seed");
  c_kn->add_option("--train", kn.train, "first N rows train, rest test")->required();
  c_kn->add_option("--m", kn.m_list, "neighbor counts");
  c_kn->add_option("--p", kn.p_list, "distance orders (exact: 2 4 6 8; sketches: 4 or 6)");
  c_kn->add_option("--source", kn.source, "exact or an estimator id")
      ->check(CLI::IsMember({"exact", "sampling", "3p", "3p-m", "1p", "1p-m", "1p-i", "d6-1p"}));
  c_kn->add_option("-k,--k", kn.k, "projections or samples per distance");
  c_kn->add_option("--seed", kn.seed, "distance seed (or LPSKETCH_SEED)");
  c_kn->add_option("--repeats", kn.repeats, "seed repeats for error bars")
      ->check(CLI::PositiveNumber);
  c_kn->add_option("--dist", kn.dist, "normal | 3pt | sparse:<s>");
  c_kn->add_option("--threads", kn.threads, "worker threads (0 = hardware)");
  c_kn->add_option("--out", kn.out, "output CSV path (default stdout)");

  auto* c_vf = app.add_subcommand("verify", "Run the built-in property suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_mo->parsed()) return cmd_moments(mo);
    if (c_sk->parsed()) return cmd_sketch(*c_sk, sk);
    if (c_es->parsed()) return cmd_estimate(*c_es, es);
    if (c_ms->parsed()) return cmd_mse(*c_ms, ms);
    if (c_kn->parsed()) return cmd_knn(*c_kn, kn);
    if (c_vf->parsed()) return run_verify(std::cout) ? 0 : 3;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
