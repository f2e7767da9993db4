// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-lpsketch-cli>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <utility>
#include <vector>

#include "lpsketch/estimators.hpp"
#include "lpsketch/io.hpp"
#include "lpsketch/knn.hpp"
#include "lpsketch/moments.hpp"
#include "lpsketch/simlab.hpp"

using namespace lpsketch;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Criterion {
  int id;
  const char* label;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  Criterion(int id_, const char* label_) : id(id_), label(label_) {}

  void require(bool cond, const std::string& why) {
    if (!cond && ok) {
      ok = false;
      detail = why;
    }
  }

  void note(const std::string& d) {
    if (ok) detail = d;
  }

  ~Criterion() {
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %2d  %s: %s  [%.1f s]\n", ok ? "PASS" : "FAIL", id, label,
                detail.c_str(), dt);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

struct Welford {
  double mean = 0.0, m2 = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double var() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se() const { return n > 1 ? std::sqrt(var() / static_cast<double>(n)) : 0.0; }
};

std::vector<double> margins(const DataVector& v) {
  std::vector<double> m;
  for (int q = 2; q <= 10; q += 2) m.push_back(power_sum(v, q));
  return m;
}

// One projection pass feeding every estimator family: the one-matrix sketches
// reuse the three-matrix spec's first matrix, and the right side routes power
// r to matrix 4 - r.
struct Shared {
  Sketch one_l, one_r, three_l, three_r;
};

Shared build(const DataVector& x, const DataVector& y, const ProjectionSpec& one,
             const ProjectionSpec& three, const std::vector<double>& mx,
             const std::vector<double>& my) {
  const std::vector<std::pair<int, int>> lroutes{{1, 1}, {2, 1}, {3, 1}, {4, 1},
                                                 {5, 1}, {2, 2}, {3, 3}};
  const std::vector<std::pair<int, int>> rroutes{{1, 1}, {2, 1}, {3, 1}, {4, 1},
                                                 {5, 1}, {2, 2}, {1, 3}};
  auto li = project_power_images(x, three, lroutes);
  auto ri = project_power_images(y, three, rroutes);
  return Shared{
      Sketch("x", one, Role::left, 5, {li[0], li[1], li[2], li[3], li[4]}, mx),
      Sketch("y", one, Role::right, 5, {ri[0], ri[1], ri[2], ri[3], ri[4]}, my),
      Sketch("x", three, Role::left, 3, {li[0], li[5], li[6]}, {mx[0], mx[1], mx[2]}),
      Sketch("y", three, Role::right, 3, {ri[6], ri[5], ri[2]}, {my[0], my[1], my[2]})};
}

Sketch margin_sketch(const DataVector& v, Role role, const ProjectionSpec& three,
                     const std::vector<double>& m3) {
  const bool left = role == Role::left;
  const std::vector<std::pair<int, int>> routes =
      left ? std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {3, 3}}
           : std::vector<std::pair<int, int>>{{1, 3}, {2, 2}, {3, 1}};
  auto im = project_power_images(v, three, routes);
  return Sketch(left ? "x" : "y", three, role, 3, {im[0], im[1], im[2]}, m3);
}

DataVector style_signs(const DataVector& v, std::uint64_t seed, bool mixed_scale) {
  PhiloxEngine g(seed, 17);
  std::vector<std::uint32_t> idx(v.indices().begin(), v.indices().end());
  std::vector<double> val(v.values().begin(), v.values().end());
  for (std::size_t j = 0; j < val.size(); ++j) {
    if (g.next_uniform() < 0.5) val[j] = -val[j];
    if (mixed_scale) val[j] *= std::pow(10.0, static_cast<double>(static_cast<int>(j % 5)) - 2.0);
  }
  return DataVector::sparse(v.dim(), std::move(idx), std::move(val));
}

double bisect_cubic_oracle(const CubicInputs& c) {
  const double prod = c.m1 * c.m2;
  if (prod == 0.0) return 0.0;
  const double L = std::sqrt(prod);
  const double kk = static_cast<double>(c.k);
  const double tau = c.t / (kk * L);
  const double sigma = (c.m1 * c.sv + c.m2 * c.su) / (kk * prod);
  const auto g = [&](double s) { return ((s - tau) * s + (sigma - 1.0)) * s - tau; };
  const double bound = 1.0 + std::max({std::fabs(tau), std::fabs(sigma - 1.0)});
  const int grid = 40000;
  std::vector<double> roots;
  double prev_s = -bound, prev_g = g(prev_s);
  for (int i = 1; i <= grid; ++i) {
    const double s = -bound + 2.0 * bound * i / grid;
    const double gs = g(s);
    if (gs == 0.0) {
      roots.push_back(s);
    } else if (prev_g != 0.0 && (prev_g < 0.0) != (gs < 0.0)) {
      double lo = prev_s, hi = s, glo = prev_g;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((glo < 0.0) == (gm < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_s = s;
    prev_g = gs;
  }
  const double plug = c.t / (kk * L);
  double best = 0.0, best_d = std::numeric_limits<double>::infinity();
  bool have_feasible = false;
  for (const double s : roots) {
    const bool feas = std::fabs(s) <= 1.0 + 1e-9;
    const double dist = std::fabs(s - plug);
    if ((feas && !have_feasible) || (feas == have_feasible && dist < best_d)) {
      best = s;
      best_d = dist;
      have_feasible = have_feasible || feas;
    }
  }
  return L * std::clamp(best, -1.0, 1.0);
}

double abs_pow_sum(const std::vector<double>& z, int q) {
  double s = 0.0;
  for (const double v : z) s += std::pow(std::fabs(v), q);
  return s;
}

MseRow find_row(const std::vector<MseRow>& rows, const std::string& id, std::uint32_t k) {
  for (const auto& r : rows)
    if (r.estimator_id == id && r.k == k) return r;
  throw std::runtime_error("mse row not found: " + id);
}

void c1() {
  Criterion c(1, "unbiasedness of 3p, 1p, 1p-i, d6-1p on 20 pairs");
  const std::size_t D = 1000;
  const std::uint32_t k = 64;
  const int nseeds = 100000;
  double worst = 0.0;
  for (int pi = 0; pi < 20 && c.ok; ++pi) {
    DataVector x, y;
    if (pi < 18) {
      PairParams pp;
      pp.sparsity1 = static_cast<double>(40 + (pi * 7) % 121) / static_cast<double>(D);
      pp.sparsity2 = static_cast<double>(40 + (pi * 13) % 121) / static_cast<double>(D);
      const double overlaps[4] = {0.0, 0.4, 1.0, 0.7};
      pp.overlap = overlaps[pi % 4];
      pp.value_kind = (pi % 2) ? "uniform" : "gamma";
      auto pr = generate_pair("sparse-overlap", pp, D, 200 + pi);
      x = pr.first;
      y = pr.second;
      if (pi % 3 == 1) {
        x = style_signs(x, 300 + pi, false);
        y = style_signs(y, 400 + pi, false);
      } else if (pi % 3 == 2) {
        x = style_signs(x, 300 + pi, true);
        y = style_signs(y, 400 + pi, true);
      }
    } else if (pi == 18) {
      PhiloxEngine g(218, 1);
      std::vector<std::uint32_t> xi, yi;
      std::vector<double> xv, yv;
      for (std::uint32_t j = 0; j < 60; ++j) {
        xi.push_back(j * 16);
        xv.push_back(g.next_normal());
      }
      for (std::uint32_t j = 0; j < 50; ++j) {
        yi.push_back(j * 16 + (j % 2) * 8);
        yv.push_back(g.next_normal());
      }
      x = DataVector::sparse(D, std::move(xi), std::move(xv));
      y = DataVector::sparse(D, std::move(yi), std::move(yv));
    } else {
      PhiloxEngine g(219, 1);
      std::vector<double> xv(D), yv(D);
      for (std::size_t j = 0; j < D; ++j) xv[j] = g.next_normal();
      for (std::size_t j = 0; j < D; ++j) yv[j] = 0.3 * xv[j] + g.next_normal();
      x = DataVector::dense(std::move(xv));
      y = DataVector::dense(std::move(yv));
    }
    const double d4 = exact_lp(x, y, 4);
    const double d6 = exact_lp(x, y, 6);
    c.require(d4 > 0.0 && d6 > 0.0, fmt("pair %d degenerate", pi));
    const auto mx = margins(x);
    const auto my = margins(y);
    ProjectionSpec one{0, k, Scheme::one_matrix, Distribution::three_point(), D};
    ProjectionSpec three{0, k, Scheme::three_matrix, Distribution::three_point(), D};
    Welford w3, w1, wi, w6;
    for (int s = 0; s < nseeds; ++s) {
      one.seed = three.seed = kernels::derive_seed(1000 + pi, s);
      const Shared sh = build(x, y, one, three, mx, my);
      w3.add(est_3p(sh.three_l, sh.three_r).value);
      w1.add(est_1p(sh.one_l, sh.one_r).value);
      wi.add(est_1p_identity(sh.one_l, sh.one_r).value);
      w6.add(est_d6_1p(sh.one_l, sh.one_r).value);
    }
    const struct {
      const Welford& w;
      double target;
      const char* id;
    } cells[] = {{w3, d4, "3p"}, {w1, d4, "1p"}, {wi, d4, "1p-i"}, {w6, d6, "d6-1p"}};
    for (const auto& cell : cells) {
      const double z = std::fabs(cell.w.mean - cell.target) / cell.w.se();
      worst = std::max(worst, z);
      c.require(z <= 3.0, fmt("pair %d %s: |z| = %.2f", pi, cell.id, z));
    }
  }
  c.note(fmt("worst |z| = %.2f over 80 cells at 1e5 seeds, k = 64", worst));
}

void c2() {
  Criterion c(2, "variance formulas, empirical and enumerated");
  PhiloxEngine g(21, 2);
  const std::size_t D = 20;
  std::vector<double> xv(D), yv(D);
  for (auto& v : xv) v = g.next_normal();
  for (auto& v : yv) v = g.next_normal();
  const DataVector x = DataVector::dense(xv);
  const DataVector y = DataVector::dense(yv);
  const MomentTable m = compute_moments(x, y);
  const auto mx = margins(x);
  const auto my = margins(y);
  double worst = 0.0;
  for (const std::uint32_t k : {10u, 100u}) {
    ProjectionSpec one{0, k, Scheme::one_matrix, Distribution::three_point(), D};
    ProjectionSpec three{0, k, Scheme::three_matrix, Distribution::three_point(), D};
    Welford w3, w1, wi, ws;
    for (int s = 0; s < 100000; ++s) {
      one.seed = three.seed = kernels::derive_seed(20 + k, s);
      const Shared sh = build(x, y, one, three, mx, my);
      w3.add(est_3p(sh.three_l, sh.three_r).value);
      w1.add(est_1p(sh.one_l, sh.one_r).value);
      wi.add(est_1p_identity(sh.one_l, sh.one_r).value);
      ws.add(est_sampling(x, y, k, kernels::derive_seed(40 + k, s)).value);
    }
    const struct {
      double emp, want;
      const char* id;
    } cells[] = {{w3.var(), var_3p(m, k), "3p"},
                 {w1.var(), var_1p(m, k), "1p"},
                 {wi.var(), var_1p_identity(m, k), "1p-i"},
                 {ws.var(), var_sampling(m, k), "sampling"}};
    for (const auto& cell : cells) {
      const double rel = std::fabs(cell.emp / cell.want - 1.0);
      worst = std::max(worst, rel);
      c.require(rel <= 0.05, fmt("k=%u %s: rel dev %.4f", k, cell.id, rel));
    }
  }
  // exact enumeration of the sampling estimator over all index tuples
  const DataVector x8 = DataVector::dense(std::vector<double>(xv.begin(), xv.begin() + 8));
  const DataVector y8 = DataVector::dense(std::vector<double>(yv.begin(), yv.begin() + 8));
  const MomentTable m8 = compute_moments(x8, y8);
  const double d4 = m8.diff_pow(4);
  double diff4[8];
  for (int i = 0; i < 8; ++i) {
    const double d = std::fabs(xv[i] - yv[i]);
    const double d2 = d * d;
    diff4[i] = d2 * d2;
  }
  for (std::uint32_t k = 1; k <= 3 && c.ok; ++k) {
    std::uint64_t count = 1;
    for (std::uint32_t j = 0; j < k; ++j) count *= 8;
    std::vector<double> est(count);
    double sum = 0.0;
    for (std::uint64_t t = 0; t < count; ++t) {
      std::uint64_t r = t;
      double acc = 0.0;
      for (std::uint32_t j = 0; j < k; ++j) {
        acc += diff4[r % 8];
        r /= 8;
      }
      est[t] = 8.0 / static_cast<double>(k) * acc;
      sum += est[t];
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const double e : est) ss += (e - mean) * (e - mean);
    const double var = ss / static_cast<double>(count);
    const double want = var_sampling(m8, k);
    c.require(std::fabs(mean - d4) <= 1e-12 * d4, fmt("enum mean, k=%u", k));
    c.require(std::fabs(var - want) <= 1e-12 * want, fmt("enum var, k=%u", k));
  }
  c.note(fmt("worst rel dev %.4f at 1e5 seeds, k in {10,100}; D=8 enumeration to 1e-12",
             worst));
}

void c3() {
  Criterion c(3, "margin estimator variance near its asymptote");
  double worst = 0.0;
  for (int pi = 0; pi < 5 && c.ok; ++pi) {
    const std::size_t D = 6 + static_cast<std::size_t>(pi);
    PhiloxEngine g(409 + pi, 3);
    std::vector<double> xv(D), yv(D);
    for (auto& v : xv) v = g.next_normal();
    for (auto& v : yv) v = g.next_normal();
    const DataVector x = DataVector::dense(xv);
    const DataVector y = DataVector::dense(yv);
    const MomentTable m = compute_moments(x, y);
    const std::uint32_t k = 10000;
    const Distribution dist = pi == 0 ? Distribution::normal() : Distribution::three_point();
    ProjectionSpec three{0, k, Scheme::three_matrix, dist, D};
    const std::vector<double> mx{power_sum(x, 2), power_sum(x, 4), power_sum(x, 6)};
    const std::vector<double> my{power_sum(y, 2), power_sum(y, 4), power_sum(y, 6)};
    Welford w;
    for (int t = 0; t < 10000; ++t) {
      three.seed = kernels::derive_seed(3000 + pi, t);
      const Sketch sl = margin_sketch(x, Role::left, three, mx);
      const Sketch sr = margin_sketch(y, Role::right, three, my);
      w.add(est_3p_margin(sl, sr).value);
    }
    const double want = var_3p_margin_asymptotic(m, k);
    const double rel = std::fabs(w.var() / want - 1.0);
    worst = std::max(worst, rel);
    c.require(rel <= 0.10, fmt("pair %d: rel dev %.3f", pi, rel));
  }
  c.note(fmt("worst rel dev %.3f over 5 pairs at k = 1e4, 1e4 trials", worst));
}

void c4() {
  Criterion c(4, "hand values at x=(1,0), y=(0,1), k=1");
  const MomentTable m =
      compute_moments(DataVector::dense({1.0, 0.0}), DataVector::dense({0.0, 1.0}));
  c.require(std::fabs(var_3p(m, 1) - 68.0) <= 1e-12, fmt("var_3p = %.17g", var_3p(m, 1)));
  c.require(std::fabs(delta_1p(m, 1) + 64.0) <= 1e-12,
            fmt("delta_1p = %.17g", delta_1p(m, 1)));
  c.require(std::fabs(var_1p(m, 1) - 4.0) <= 1e-12, fmt("var_1p = %.17g", var_1p(m, 1)));
  c.note("var_3p = 68, delta_1p = -64, var_1p = 4");
}

void c5() {
  Criterion c(5, "identity estimator is exactly zero at x = y");
  PhiloxEngine g(5, 5);
  const std::size_t D = 32;
  const double scales[5] = {1.0, 1e6, 1e-6, 1e3, 1e-3};
  double worst = 0.0;
  for (int t = 0; t < 100 && c.ok; ++t) {
    std::vector<double> xv(D, 0.0);
    if (t > 0)
      for (std::size_t j = 0; j < D; ++j)
        xv[j] = g.next_uniform() < 0.125 ? 0.0 : g.next_normal() * scales[j % 5];
    const DataVector x = DataVector::dense(xv);
    const auto mx = margins(x);
    const std::vector<std::pair<int, int>> rr{{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}};
    for (int s = 0; s < 3; ++s) {
      const Distribution dist =
          s == 2 ? Distribution::normal() : Distribution::three_point();
      ProjectionSpec one{kernels::derive_seed(500 + t, s), 16, Scheme::one_matrix, dist, D};
      auto im = project_power_images(x, one, rr);
      const Sketch sl("x", one, Role::left, 5, {im[0], im[1], im[2], im[3], im[4]}, mx);
      const Sketch sr("y", one, Role::right, 5, {im[0], im[1], im[2], im[3], im[4]}, mx);
      const double v = est_1p_identity(sl, sr).value;
      c.require(v == 0.0, fmt("trial %d seed %d: estimate %g", t, s, v));
    }
    const MomentTable m = compute_moments(x, x);
    const double rel = std::fabs(var_1p_identity(m, 7)) / std::max(1.0, var_3p(m, 7));
    worst = std::max(worst, rel);
    c.require(rel <= 1e-10, fmt("trial %d: formula residual %g", t, rel));
  }
  c.note(fmt("100 vectors x 3 seeds bit-exact; worst formula residual %.1e", worst));
}

void c6() {
  Criterion c(6, "delta_1p <= 0 wherever the moment condition holds");
  PhiloxEngine g(6, 6);
  int held = 0;
  for (int t = 0; t < 1000 && c.ok; ++t) {
    const std::size_t D = 16;
    std::vector<double> xv(D), yv(D);
    for (auto& v : xv)
      v = g.next_uniform() < 0.15 ? 0.0
                                  : std::fabs(g.next_normal()) * (1.0 + static_cast<double>(t % 3));
    for (auto& v : yv) v = g.next_uniform() < 0.15 ? 0.0 : std::fabs(g.next_normal());
    const DataVector x = DataVector::dense(xv);
    const DataVector y = DataVector::dense(yv);
    if (!lemma4_condition(x, y).holds) continue;
    ++held;
    const MomentTable m = compute_moments(x, y);
    const double d = delta_1p(m, 1);
    c.require(d <= 1e-9 * std::max(1.0, var_3p(m, 1)), fmt("trial %d: delta_1p = %g", t, d));
  }
  c.require(held >= 200, fmt("condition held only %d of 1000", held));
  int gamma_held = 0, beta_held = 0;
  for (int t = 0; t < 100; ++t) {
    PhiloxEngine gg(600 + t, 1);
    std::vector<double> zv(10000);
    for (auto& v : zv) v = sample_gamma(gg, 2.0, 1.0);
    if (lemma4_condition(DataVector::dense(zv), DataVector::dense(zv)).holds) ++gamma_held;
    PhiloxEngine gb(700 + t, 1);
    for (auto& v : zv) v = sample_beta(gb, 2.0, 2.0);
    if (lemma4_condition(DataVector::dense(zv), DataVector::dense(zv)).holds) ++beta_held;
  }
  c.require(gamma_held >= 99, fmt("gamma held %d of 100", gamma_held));
  c.require(beta_held >= 99, fmt("beta held %d of 100", beta_held));
  std::vector<double> cv(1001, 1.0);
  cv[0] = 10.0;
  const Lemma4Result cr =
      lemma4_condition(DataVector::dense(cv), DataVector::dense(cv));
  c.require(!cr.holds, "spiked counterexample not rejected");
  c.require(cr.lhs == -91100000.0, fmt("counterexample lhs = %.17g", cr.lhs));
  c.note(fmt("%d of 1000 pairs held, gamma %d/100, beta %d/100, spike rejected", held,
             gamma_held, beta_held));
}

void c7() {
  Criterion c(7, "margin cubic against factorization and bisection");
  double worst = 0.0;
  PhiloxEngine eng(71, 1);
  for (int t = 0; t < 200 && c.ok; ++t) {
    const double m1 = 0.5 + 4.0 * eng.next_uniform();
    const double m2 = 0.5 + 4.0 * eng.next_uniform();
    const double rho = -0.95 + 1.9 * eng.next_uniform();
    const double L = std::sqrt(m1 * m2);
    const std::uint32_t k = 1 + (t % 7);
    CubicInputs ci;
    ci.t = static_cast<double>(k) * rho * L;
    ci.su = static_cast<double>(k) * m1;
    ci.sv = static_cast<double>(k) * m2;
    ci.m1 = m1;
    ci.m2 = m2;
    ci.k = k;
    const double want = rho * L;
    const double err = std::fabs(solve_margin_cubic(ci) - want) / std::max(1.0, std::fabs(want));
    worst = std::max(worst, err);
    c.require(err <= 1e-10, fmt("factorization trial %d: err %g", t, err));
  }
  PhiloxEngine eng2(72, 2);
  for (int t = 0; t < 1000 && c.ok; ++t) {
    const double m1 = 0.2 + 5.0 * eng2.next_uniform();
    const double m2 = 0.2 + 5.0 * eng2.next_uniform();
    const double L = std::sqrt(m1 * m2);
    const std::uint32_t k = 1 + (t % 16);
    CubicInputs ci;
    ci.su = static_cast<double>(k) * m1 * (0.3 + 1.4 * eng2.next_uniform());
    ci.sv = static_cast<double>(k) * m2 * (0.3 + 1.4 * eng2.next_uniform());
    ci.t = static_cast<double>(k) * L * (-1.3 + 2.6 * eng2.next_uniform());
    ci.m1 = m1;
    ci.m2 = m2;
    ci.k = k;
    const double err = std::fabs(solve_margin_cubic(ci) - bisect_cubic_oracle(ci));
    worst = std::max(worst, err / std::max(1.0, L));
    c.require(err <= 1e-10 * std::max(1.0, L), fmt("oracle trial %d: err %g", t, err));
  }
  c.note(fmt("200 factorizations + 1000 oracle instances, worst rel err %.1e", worst));
}

void c8() {
  Criterion c(8, "complexity ratio bound and its tight cases");
  PhiloxEngine g(81, 3);
  const std::size_t D = 64;
  double worst = 0.0;
  for (int t = 0; t < 1000 && c.ok; ++t) {
    std::vector<double> zv(D);
    for (std::size_t j = 0; j < D; ++j)
      zv[j] = g.next_uniform() < 0.1
                  ? 0.0
                  : g.next_normal() *
                        std::pow(10.0, static_cast<double>(static_cast<int>(j % 7)) - 3.0);
    zv[0] = 1.0 + std::fabs(g.next_normal());
    const DataVector z = DataVector::dense(zv);
    for (const int p : {4, 6, 8}) {
      const double bound = std::pow(static_cast<double>(D), 1.0 - 2.0 / p);
      const double Z = complexity_ratio(z, p);
      worst = std::max(worst, Z / bound);
      c.require(Z <= bound * (1.0 + 1e-9), fmt("trial %d p=%d: Z = %.6f", t, p, Z));
    }
  }
  for (int t = 0; t < 20 && c.ok; ++t) {
    const std::size_t Ds = 2 + 3 * static_cast<std::size_t>(t);
    std::vector<double> zv(Ds, 0.0);
    zv[static_cast<std::size_t>(t) % Ds] =
        (t % 2 ? -1.0 : 1.0) * std::pow(10.0, static_cast<double>(t % 11) - 5.0);
    const DataVector z = DataVector::dense(zv);
    for (const int p : {4, 6, 8}) {
      c.require(std::fabs(complexity_ratio(z, p) - 1.0) <= 1e-12, fmt("spike %d p=%d", t, p));
      const double sp = abs_pow_sum(zv, p);
      const double s2p2 = abs_pow_sum(zv, 2 * p - 2);
      const double rhs = std::pow(sp, (2.0 * p - 2.0) / p);
      c.require(std::fabs(s2p2 - rhs) <= 1e-12 * rhs, fmt("spike step2 %d p=%d", t, p));
    }
  }
  for (int t = 0; t < 15 && c.ok; ++t) {
    const std::size_t Dc = 2 + 5 * static_cast<std::size_t>(t);
    const double cv = (t % 2 ? -1.0 : 1.0) * (0.5 + 0.3 * t);
    const DataVector z = DataVector::dense(std::vector<double>(Dc, cv));
    const double s2 = power_sum(z, 2);
    const double rhs = std::sqrt(static_cast<double>(Dc)) * std::sqrt(power_sum(z, 4));
    c.require(std::fabs(s2 - rhs) <= 1e-12 * s2, fmt("constant step1 %d", t));
    c.require(std::fabs(complexity_ratio(z, 4) - 1.0) <= 1e-12, fmt("constant Z %d", t));
  }
  c.note(fmt("1000 vectors, p in {4,6,8}, worst Z/bound = %.3f; spikes and constants tight",
             worst));
}

void c9() {
  Criterion c(9, "ordering claims across the four regimes");
  // heavy-tailed disjoint sparse pair: sampling pays for the zeros it draws
  {
    PairParams pp;
    pp.gamma_shape = 0.3;
    pp.gamma_scale = 2.0;
    pp.sparsity1 = pp.sparsity2 = 0.02;
    pp.overlap = 0.0;
    pp.value_kind = "gamma";
    auto [x, y] = generate_pair("sparse-overlap", pp, 2000, 31);
    const MomentTable m = compute_moments(x, y);
    c.require(var_sampling(m, 100) >= 50.0 * var_1p(m, 100),
              "(a) predicted sampling penalty missing");
    ExperimentSpec es;
    es.x = x;
    es.y = y;
    es.k_grid = {100};
    es.trials = 3000;
    es.estimators = {"sampling", "1p"};
    es.dist = Distribution::three_point();
    es.master_seed = 91;
    es.threads = 1;
    const auto rows = run_mse(es);
    const double e_s = *find_row(rows, "sampling", 100).empirical_mse;
    const double e_1 = *find_row(rows, "1p", 100).empirical_mse;
    c.require(e_s > 10.0 * e_1, fmt("(a) sampling %.3g vs 1p %.3g", e_s, e_1));
  }
  // independent gamma pairs: the one-matrix scheme is never behind
  for (const std::uint64_t seed : {32ull, 132ull, 232ull}) {
    PairParams pp;
    auto [x, y] = generate_pair("gamma", pp, 50, seed);
    const MomentTable m = compute_moments(x, y);
    c.require(var_1p(m, 16) <= 0.5 * var_3p(m, 16),
              fmt("(b) seed %llu: predicted ratio too high", (unsigned long long)seed));
    ExperimentSpec es;
    es.x = x;
    es.y = y;
    es.k_grid = {16};
    es.trials = 20000;
    es.estimators = {"1p", "3p"};
    es.dist = Distribution::three_point();
    es.master_seed = 92;
    es.threads = 1;
    const auto rows = run_mse(es);
    c.require(*find_row(rows, "1p", 16).empirical_mse <
                  *find_row(rows, "3p", 16).empirical_mse,
              fmt("(b) seed %llu: 1p not ahead", (unsigned long long)seed));
  }
  // near-identical pair, differences concentrated on four coordinates
  {
    PhiloxEngine g(63, 24);
    std::vector<double> xv(200);
    for (auto& v : xv) v = sample_gamma(g, 2.0, 1.0);
    std::vector<double> yv = xv;
    for (const int j : {10, 60, 110, 160}) yv[static_cast<std::size_t>(j)] += 3.3;
    const DataVector x = DataVector::dense(xv);
    const DataVector y = DataVector::dense(yv);
    const double b4 = beta4(x, y);
    c.require(b4 >= 0.98, fmt("(c) beta4 = %.4f", b4));
    const MomentTable m = compute_moments(x, y);
    const double vi = var_1p_identity(m, 16);
    const double vmin = std::min({var_sampling(m, 16), var_3p(m, 16), var_1p(m, 16)});
    c.require(vi <= 0.25 * vmin, "(c) predicted identity advantage missing");
    ExperimentSpec es;
    es.x = x;
    es.y = y;
    es.k_grid = {16};
    es.trials = 20000;
    es.estimators = {"sampling", "3p", "1p", "1p-i"};
    es.dist = Distribution::three_point();
    es.master_seed = 93;
    es.threads = 1;
    const auto rows = run_mse(es);
    const double ei = *find_row(rows, "1p-i", 16).empirical_mse;
    for (const char* id : {"sampling", "3p", "1p"})
      c.require(ei < *find_row(rows, id, 16).empirical_mse,
                fmt("(c) 1p-i not ahead of %s", id));
  }
  // disjoint supports: pooling the margins misleads the identity estimator
  {
    PairParams pp;
    pp.sparsity1 = pp.sparsity2 = 0.2;
    pp.overlap = 0.0;
    auto [x, y] = generate_pair("sparse-overlap", pp, 100, 34);
    c.require(beta4(x, y) <= 1e-12, fmt("(d) beta4 = %g", beta4(x, y)));
    const MomentTable m = compute_moments(x, y);
    c.require(var_1p_identity(m, 16) >= 1.5 * var_1p(m, 16),
              "(d) predicted identity penalty missing");
    ExperimentSpec es;
    es.x = x;
    es.y = y;
    es.k_grid = {16};
    es.trials = 20000;
    es.estimators = {"1p", "1p-i"};
    es.dist = Distribution::three_point();
    es.master_seed = 94;
    es.threads = 1;
    const auto rows = run_mse(es);
    c.require(*find_row(rows, "1p-i", 16).empirical_mse >
                  *find_row(rows, "1p", 16).empirical_mse,
              "(d) 1p-i not behind 1p");
  }
  c.note("sampling >> 1p on heavy tails; 1p <= 3p on gamma; 1p-i best near x = y, worst "
         "on disjoint supports");
}

void c10() {
  Criterion c(10, "knn with sketched distances tracks exact knn");
  PhiloxEngine eng(60, 21);
  LabeledDataset ds;
  const std::size_t D = 500;
  const double spread = 0.45;
  for (std::size_t i = 0; i < 800; ++i) {
    const int cls = static_cast<int>(i % 2);
    std::vector<double> v(D);
    for (std::size_t j = 0; j < D; ++j) {
      v[j] = eng.next_normal();
      if (j % 2 == static_cast<std::size_t>(cls)) v[j] += spread;
    }
    ds.rows.push_back(DataVector::dense(std::move(v)));
    ds.labels.push_back(cls);
    (i < 400 ? ds.train_idx : ds.test_idx).push_back(i);
  }
  const std::uint32_t m = 7;
  DistanceSource exact;
  const KnnResult re = knn_classify(ds, m, 4, exact, 1);
  // independent brute-force pass with the same tie policy
  std::size_t miss = 0;
  for (const std::size_t ti : ds.test_idx) {
    std::vector<std::pair<double, int>> cand;
    const auto& tv = ds.rows[ti].values();
    for (const std::size_t tj : ds.train_idx) {
      const auto& uv = ds.rows[tj].values();
      double s = 0.0;
      for (std::size_t j = 0; j < D; ++j) {
        const double d = std::fabs(tv[j] - uv[j]);
        const double d2 = d * d;
        s += d2 * d2;
      }
      cand.push_back({s, ds.labels[tj]});
    }
    std::sort(cand.begin(), cand.end());
    std::map<int, std::pair<int, double>> tally;
    for (std::uint32_t i = 0; i < m; ++i) {
      tally[cand[i].second].first += 1;
      tally[cand[i].second].second += cand[i].first;
    }
    int best = tally.begin()->first;
    auto bt = tally.begin()->second;
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it)
      if (it->second.first > bt.first ||
          (it->second.first == bt.first && it->second.second < bt.second)) {
        best = it->first;
        bt = it->second;
      }
    if (best != ds.labels[ti]) ++miss;
  }
  const double oracle = static_cast<double>(miss) / static_cast<double>(ds.test_idx.size());
  c.require(re.mean_error == oracle, fmt("exact %.4f vs oracle %.4f", re.mean_error, oracle));
  DistanceSource src;
  src.estimator_id = "1p";
  src.k = 512;
  src.seed = 99;
  src.repeats = 100;
  src.dist = Distribution::three_point();
  const KnnResult rs = knn_classify(ds, m, 4, src, 1);
  const double gap = std::fabs(rs.mean_error - re.mean_error);
  c.require(gap <= 0.02, fmt("gap %.4f exceeds 0.02", gap));
  c.note(fmt("exact error %.4f matches brute force; 1p at k=512 averages %.4f over 100 "
             "seeds, gap %.4f",
             re.mean_error, rs.mean_error, gap));
}

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun sh(const std::string& cmd) {
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return {};
  CliRun r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void c11(const std::string& cli) {
  Criterion c(11, "CLI reruns are byte-identical");
  char tmpl[] = "/tmp/lpsketch_accept_XXXXXX";
  if (mkdtemp(tmpl) == nullptr) {
    c.require(false, "mkdtemp failed");
    return;
  }
  const std::string dir = tmpl;
  std::ofstream(dir + "/x.csv") << "1.5,-2,0.25,3,0,1\n";
  std::ofstream(dir + "/y.csv") << "0.5,1,-0.75,2,1,0\n";
  const std::vector<std::string> cmds = {
      "estimate --estimator 3p --k 32 --seed 9 --x " + dir + "/x.csv --y " + dir + "/y.csv",
      "estimate --estimator sampling --k 4 --seed 11 --x " + dir + "/x.csv --y " + dir +
          "/y.csv",
      "moments --x " + dir + "/x.csv --y " + dir + "/y.csv",
      "mse --x " + dir + "/x.csv --y " + dir + "/y.csv --k 4 8 --trials 200 --estimators "
      "1p 3p sampling --seed 17 --threads 1",
      "knn --synthetic --classes 2 --per-class 12 --dim 5 --spread 1.0 --data-seed 4 "
      "--train 16 --m 1 3 --p 4 --source 1p --k 16 --repeats 3 --seed 23",
  };
  int checked = 0;
  for (const auto& cmd : cmds) {
    const CliRun a = sh(cli + " " + cmd + " 2>/dev/null");
    const CliRun b = sh(cli + " " + cmd + " 2>/dev/null");
    c.require(a.code == 0 && b.code == 0, "nonzero exit: " + cmd);
    c.require(!a.out.empty() && a.out == b.out, "stdout differs: " + cmd);
    ++checked;
  }
  for (const char* scheme : {"1p", "3p"}) {
    const std::string extra = std::string(scheme) == "1p" ? " --maxpower 5" : "";
    const std::string base = cli + " sketch --input " + dir + "/x.csv --scheme " + scheme +
                             extra + " --k 8 --seed 3 --out " + dir;
    const CliRun s1 = sh(base + "/s1.txt 2>/dev/null");
    const CliRun s2 = sh(base + "/s2.txt 2>/dev/null");
    c.require(s1.code == 0 && s2.code == 0, fmt("sketch %s: nonzero exit", scheme));
    const std::string b1 = slurp(dir + "/s1.txt");
    c.require(!b1.empty() && b1 == slurp(dir + "/s2.txt"),
              fmt("sketch %s: bytes differ", scheme));
    ++checked;
  }
  const int rc = std::system(("rm -rf " + dir).c_str());
  (void)rc;
  c.note(fmt("%d invocations, each byte-identical across two runs", checked));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-lpsketch-cli>\n");
    return 2;
  }
  std::printf("acceptance: library and CLI criteria\n");
  c1();
  c2();
  c3();
  c4();
  c5();
  c6();
  c7();
  c8();
  c9();
  c10();
  c11(argv[1]);
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
