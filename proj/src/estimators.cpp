#include "lpsketch/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpsketch/kernels.hpp"

namespace lpsketch {

namespace {

double sdot(const std::vector<double>& a, const std::vector<double>& b) {
  return kernels::dot(a.data(), b.data(), a.size());
}

void check_pair(const Sketch& sx, const Sketch& sy, Scheme scheme, const char* who) {
  if (!(sx.spec() == sy.spec()))
    throw std::invalid_argument(std::string(who) + ": sketch specs differ");
  if (sx.spec().scheme != scheme)
    throw std::invalid_argument(std::string(who) + (scheme == Scheme::three_matrix
                                                        ? ": requires ThreeMatrix sketches"
                                                        : ": requires OneMatrix sketches"));
  if (scheme == Scheme::three_matrix &&
      (sx.role() != Role::left || sy.role() != Role::right))
    throw std::invalid_argument(std::string(who) + ": requires a (left, right) sketch pair");
}

// Core linear combination 6 u2'v2 - 4 u3'v1 - 4 u1'v3, shared by 3p and 1p.
double cross_terms(const Sketch& sx, const Sketch& sy) {
  const double c = sdot(sx.power(2), sy.power(2));
  const double d = sdot(sx.power(3), sy.power(1));
  const double e = sdot(sx.power(1), sy.power(3));
  return 6.0 * c - 4.0 * d - 4.0 * e;
}

}  // namespace

Estimate est_exact(const DataVector& x, const DataVector& y, int p) {
  Estimate e;
  e.estimator_id = "exact";
  e.value = exact_lp(x, y, p);
  e.predicted_variance = 0.0;
  e.k = 0;
  e.p = p;
  return e;
}

Estimate est_sampling(const DataVector& x, const DataVector& y, std::uint32_t k,
                      std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("est_sampling: k must be >= 1");
  if (x.dim() != y.dim()) throw std::invalid_argument("est_sampling: dimension mismatch");
  const std::uint64_t dim = x.dim();
  if (dim == 0) throw std::invalid_argument("est_sampling: empty vectors");

  const std::uint64_t key = kernels::stream_key(seed, 0);
  CompensatedSum acc;
  for (std::uint32_t j = 0; j < k; ++j) {
    const std::uint64_t bits = kernels::stream_u64(key, 0, j);
    const std::uint64_t idx =
        static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * dim) >> 64);
    const double d = x.at(idx) - y.at(idx);
    const double d2 = d * d;
    acc.add(d2 * d2);
  }
  const double dd = static_cast<double>(dim);
  const double kk = static_cast<double>(k);

  CompensatedSum s4, s8;
  for_each_union(x, y, [&](std::uint64_t, double xv, double yv) {
    const double d = xv - yv;
    const double d2 = d * d;
    const double p4 = d2 * d2;
    s4.add(p4);
    s8.add(p4 * p4);
  });
  const double d4 = s4.value();
  const double d8 = s8.value();

  Estimate e;
  e.estimator_id = "sampling";
  e.value = (dd / kk) * acc.value();
  e.predicted_variance = std::max(0.0, (dd / kk) * (d8 - d4 * d4 / dd));
  e.k = k;
  e.p = 4;
  return e;
}

double var_sampling(const MomentTable& m, std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("var_sampling: k must be >= 1");
  const double dd = static_cast<double>(m.dim());
  if (dd == 0.0) return 0.0;
  const double d4 = m.diff_pow(4);
  return (dd / static_cast<double>(k)) * (m.diff_pow(8) - d4 * d4 / dd);
}

double var_crs_predictor(const MomentTable& m, std::uint32_t k) {
  const double dd = static_cast<double>(m.dim());
  if (dd == 0.0) return 0.0;
  const double nz = static_cast<double>(std::max(m.nnz_x(), m.nnz_y()));
  return (nz / dd) * var_sampling(m, k);
}

Estimate est_3p(const Sketch& sx, const Sketch& sy, const MomentTable* moments) {
  check_pair(sx, sy, Scheme::three_matrix, "est_3p");
  const double kk = static_cast<double>(sx.spec().k);
  Estimate e;
  e.estimator_id = "3p";
  e.value = sx.margin(4) + sy.margin(4) + cross_terms(sx, sy) / kk;
  if (moments) e.predicted_variance = var_3p(*moments, sx.spec().k);
  e.k = sx.spec().k;
  e.p = 4;
  return e;
}

Estimate est_1p(const Sketch& sx, const Sketch& sy, const MomentTable* moments) {
  check_pair(sx, sy, Scheme::one_matrix, "est_1p");
  const double kk = static_cast<double>(sx.spec().k);
  Estimate e;
  e.estimator_id = "1p";
  e.value = sx.margin(4) + sy.margin(4) + cross_terms(sx, sy) / kk;
  if (moments) e.predicted_variance = var_1p(*moments, sx.spec().k);
  e.k = sx.spec().k;
  e.p = 4;
  return e;
}

Estimate est_1p_identity(const Sketch& sx, const Sketch& sy, const MomentTable* moments) {
  check_pair(sx, sy, Scheme::one_matrix, "est_1p_identity");
  const double kk = static_cast<double>(sx.spec().k);
  const double a = sdot(sx.power(2), sx.power(2));
  const double a2 = sdot(sy.power(2), sy.power(2));
  const double b = sdot(sx.power(1), sx.power(3));
  const double b2 = sdot(sy.power(1), sy.power(3));
  const double c = sdot(sx.power(2), sy.power(2));
  const double d = sdot(sx.power(3), sy.power(1));
  const double d2 = sdot(sx.power(1), sy.power(3));
  // Grouped so every term cancels pairwise when sx and sy are sketches of the
  // same vector: the whole expression is then exactly zero in floating point.
  const double g1 = (6.0 * c - 3.0 * a) - 3.0 * a2;
  const double g2 = (4.0 * b - 4.0 * d) + (4.0 * b2 - 4.0 * d2);
  Estimate e;
  e.estimator_id = "1p-i";
  e.value = (g1 + g2) / kk;
  if (moments) e.predicted_variance = var_1p_identity(*moments, sx.spec().k);
  e.k = sx.spec().k;
  e.p = 4;
  return e;
}

namespace {

Estimate margin_common(const Sketch& sx, const Sketch& sy, const char* id) {
  const std::uint32_t k = sx.spec().k;
  CubicInputs c22{sdot(sx.power(2), sy.power(2)), sdot(sx.power(2), sx.power(2)),
                  sdot(sy.power(2), sy.power(2)), sx.margin(4), sy.margin(4), k};
  CubicInputs c31{sdot(sx.power(3), sy.power(1)), sdot(sx.power(3), sx.power(3)),
                  sdot(sy.power(1), sy.power(1)), sx.margin(6), sy.margin(2), k};
  CubicInputs c13{sdot(sx.power(1), sy.power(3)), sdot(sx.power(1), sx.power(1)),
                  sdot(sy.power(3), sy.power(3)), sx.margin(2), sy.margin(6), k};
  const double a22 = solve_margin_cubic(c22);
  const double a31 = solve_margin_cubic(c31);
  const double a13 = solve_margin_cubic(c13);
  Estimate e;
  e.estimator_id = id;
  e.value = sx.margin(4) + sy.margin(4) + 6.0 * a22 - 4.0 * a31 - 4.0 * a13;
  e.k = k;
  e.p = 4;
  return e;
}

}  // namespace

Estimate est_3p_margin(const Sketch& sx, const Sketch& sy, const MomentTable* moments) {
  check_pair(sx, sy, Scheme::three_matrix, "est_3p_margin");
  Estimate e = margin_common(sx, sy, "3p-m");
  if (moments) e.predicted_variance = var_3p_margin_asymptotic(*moments, sx.spec().k);
  return e;
}

Estimate est_1p_margin(const Sketch& sx, const Sketch& sy) {
  check_pair(sx, sy, Scheme::one_matrix, "est_1p_margin");
  return margin_common(sx, sy, "1p-m");
}

Estimate est_d6_1p(const Sketch& sx, const Sketch& sy) {
  check_pair(sx, sy, Scheme::one_matrix, "est_d6_1p");
  if (sx.max_power() < 5 || sy.max_power() < 5)
    throw std::invalid_argument("est_d6_1p: sketches must carry powers up to 5");
  const double kk = static_cast<double>(sx.spec().k);
  const double t33 = sdot(sx.power(3), sy.power(3));
  const double t24 = sdot(sx.power(2), sy.power(4));
  const double t42 = sdot(sx.power(4), sy.power(2));
  const double t51 = sdot(sx.power(5), sy.power(1));
  const double t15 = sdot(sx.power(1), sy.power(5));
  Estimate e;
  e.estimator_id = "d6-1p";
  e.value = sx.margin(6) + sy.margin(6) +
            (-20.0 * t33 + 15.0 * t24 + 15.0 * t42 - 6.0 * t51 - 6.0 * t15) / kk;
  e.k = sx.spec().k;
  e.p = 6;
  return e;
}

double var_3p(const MomentTable& m, std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("var_3p: k must be >= 1");
  const double kk = static_cast<double>(k);
  return (36.0 / kk) * (m.s(4, 0) * m.s(0, 4) + m.s(2, 2) * m.s(2, 2)) +
         (16.0 / kk) * (m.s(6, 0) * m.s(0, 2) + m.s(3, 1) * m.s(3, 1)) +
         (16.0 / kk) * (m.s(2, 0) * m.s(0, 6) + m.s(1, 3) * m.s(1, 3));
}

double delta_1p(const MomentTable& m, std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("delta_1p: k must be >= 1");
  const double kk = static_cast<double>(k);
  return -(48.0 / kk) * (m.s(5, 0) * m.s(0, 3) + m.s(2, 1) * m.s(3, 2)) -
         (48.0 / kk) * (m.s(3, 0) * m.s(0, 5) + m.s(1, 2) * m.s(2, 3)) +
         (32.0 / kk) * (m.s(4, 0) * m.s(0, 4) + m.s(1, 1) * m.s(3, 3));
}

double var_1p(const MomentTable& m, std::uint32_t k) {
  return var_3p(m, k) + delta_1p(m, k);
}

double var_3p_margin_asymptotic(const MomentTable& m, std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("var_3p_margin_asymptotic: k must be >= 1");
  const double kk = static_cast<double>(k);
  const auto term = [kk](double coef, double prod, double cross) {
    const double den = prod + cross * cross;
    if (!(den > 0.0)) return 0.0;
    const double num = prod - cross * cross;
    return (coef / kk) * num * num / den;
  };
  return term(36.0, m.s(4, 0) * m.s(0, 4), m.s(2, 2)) +
         term(16.0, m.s(6, 0) * m.s(0, 2), m.s(3, 1)) +
         term(16.0, m.s(2, 0) * m.s(0, 6), m.s(1, 3));
}

double delta_identity(const MomentTable& m, std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("delta_identity: k must be >= 1");
  const auto s = [&m](int a, int b) { return m.s(a, b); };
  double t = 36.0 * s(2, 2) * s(2, 2) + 34.0 * (s(4, 0) * s(4, 0) + s(0, 4) * s(0, 4));
  t += 32.0 * s(1, 3) * s(3, 1) - 32.0 * s(4, 0) * s(3, 1);
  t -= 72.0 * (s(4, 0) * s(2, 2) + s(0, 4) * s(2, 2));
  t -= 32.0 * (s(0, 4) * s(3, 1) + s(4, 0) * s(1, 3) + s(0, 4) * s(1, 3));
  t -= 48.0 * (s(3, 0) * s(5, 0) + s(2, 1) * s(2, 3));
  t -= 48.0 * (s(0, 3) * s(0, 5) + s(1, 2) * s(3, 2));
  t += 48.0 * (s(3, 0) * s(3, 2) + s(5, 0) * s(1, 2) + s(0, 3) * s(2, 3));
  t += 48.0 * (s(0, 5) * s(2, 1) + s(5, 0) * s(2, 1) + s(0, 3) * s(3, 2));
  t += 48.0 * (s(3, 0) * s(2, 3) + s(0, 5) * s(1, 2));
  t -= 32.0 * (s(6, 0) * s(1, 1) + s(0, 2) * s(3, 3));
  t -= 32.0 * (s(2, 0) * s(3, 3) + s(0, 6) * s(1, 1));
  t += 16.0 * (s(2, 0) * s(6, 0) + s(0, 2) * s(0, 6) + 2.0 * s(1, 1) * s(3, 3));
  return t / static_cast<double>(k);
}

double var_1p_identity(const MomentTable& m, std::uint32_t k) {
  return var_1p(m, k) + delta_identity(m, k);
}

double solve_margin_cubic(const CubicInputs& c) {
  if (c.su < 0.0 || c.sv < 0.0 || c.m1 < 0.0 || c.m2 < 0.0)
    throw std::invalid_argument("solve_margin_cubic: squared inputs must be nonnegative");
  if (c.k < 1) throw std::invalid_argument("solve_margin_cubic: k must be >= 1");
  const double prod = c.m1 * c.m2;
  if (prod == 0.0) return 0.0;

  // Scale a = L*s with L = sqrt(m1*m2): s^3 - tau*s^2 + (sigma-1)*s - tau = 0.
  const double L = std::sqrt(prod);
  const double kk = static_cast<double>(c.k);
  const double tau = c.t / (kk * L);
  const double sigma = (c.m1 * c.sv + c.m2 * c.su) / (kk * prod);
  const double p = -tau;
  const double q = sigma - 1.0;
  const double r = -tau;

  // Depressed cubic w^3 + P*w + Q with s = w - p/3.
  const double shift = p / 3.0;
  const double P = q - p * p / 3.0;
  const double Q = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;

  double roots[3];
  int nroots = 0;
  if (P < 0.0) {
    const double mm = 2.0 * std::sqrt(-P / 3.0);
    double arg = 3.0 * Q / (P * mm);
    if (std::fabs(arg) <= 1.0 + 1e-12) {
      arg = std::clamp(arg, -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      constexpr double kTwoPiThird = 2.0943951023931953;
      for (int i = 0; i < 3; ++i)
        roots[nroots++] = mm * std::cos(theta - kTwoPiThird * i);
    }
  }
  if (nroots == 0) {
    const double disc = Q * Q / 4.0 + P * P * P / 27.0;
    const double sq = std::sqrt(std::max(disc, 0.0));
    const double u = std::cbrt(-Q / 2.0 - std::copysign(sq, Q));
    roots[nroots++] = (u == 0.0) ? 0.0 : u - P / (3.0 * u);
  }

  // Prefer feasible roots (|a| <= L), break ties by distance to the plug-in
  // estimate t/k, clamp at the end.
  const double plug_s = c.t / (kk * L);
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  bool have_feasible = false;
  for (int i = 0; i < nroots; ++i) {
    const double s = roots[i] - shift;
    const bool feas = std::fabs(s) <= 1.0 + 1e-9;
    const double dist = std::fabs(s - plug_s);
    if ((feas && !have_feasible) || (feas == have_feasible && dist < best_d)) {
      best_s = s;
      best_d = dist;
      have_feasible = have_feasible || feas;
    }
  }
  return L * std::clamp(best_s, -1.0, 1.0);
}

Lemma4Result lemma4_condition(const DataVector& x, const DataVector& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("lemma4_condition: dimension mismatch");
  x.for_each_nonzero([](std::uint64_t, double v) {
    if (v < 0.0) throw std::domain_error("lemma4_condition: negative entry in x");
  });
  y.for_each_nonzero([](std::uint64_t, double v) {
    if (v < 0.0) throw std::domain_error("lemma4_condition: negative entry in y");
  });
  CompensatedSum s2, s3, s5, s6;
  for_each_union(x, y, [&](std::uint64_t, double xv, double yv) {
    const double prod = xv * yv;
    if (prod == 0.0) return;
    const double z = std::sqrt(prod);
    const double z2 = z * z;
    const double z3 = z2 * z;
    const double z5 = z3 * z2;
    const double z6 = z3 * z3;
    s2.add(z2);
    s3.add(z3);
    s5.add(z5);
    s6.add(z6);
  });
  Lemma4Result res;
  res.lhs = 5.0 * s3.value() * s5.value() - s2.value() * s6.value();
  res.holds = res.lhs >= 0.0;
  return res;
}

double complexity_ratio(const DataVector& z, int p) {
  if (p < 4 || p % 2 != 0)
    throw std::invalid_argument("complexity_ratio: p must be even and >= 4");
  CompensatedSum s2, sp, s2p2;
  z.for_each_nonzero([&](std::uint64_t, double v) {
    const double a = std::fabs(v);
    const double a2 = a * a;
    double ap = a2;
    for (int i = 1; i < p / 2; ++i) ap *= a2;
    double a2p2 = ap;
    for (int i = p / 2; i < p - 1; ++i) a2p2 *= a2;
    s2.add(a2);
    sp.add(ap);
    s2p2.add(a2p2);
  });
  const double den = sp.value();
  if (den == 0.0) throw std::domain_error("complexity_ratio: zero vector");
  return s2.value() * s2p2.value() / (den * den);
}

Estimate select_estimator(const Sketch& sx, const Sketch& sy, double tau) {
  check_pair(sx, sy, Scheme::one_matrix, "select_estimator");
  const double denom = sx.margin(4) + sy.margin(4);
  if (denom == 0.0)
    throw std::domain_error("select_estimator: both fourth-moment margins are zero");
  Estimate e1 = est_1p(sx, sy);
  const double beta_hat = std::clamp(1.0 - e1.value / denom, 0.0, 1.0);
  if (beta_hat > tau) return est_1p_identity(sx, sy);
  return e1;
}

}  // namespace lpsketch
