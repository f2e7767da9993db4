#include "lpsketch/verify.hpp"

#include <cmath>
#include <cstring>
#include <ostream>
#include <sstream>
#include <vector>

#include "lpsketch/estimators.hpp"
#include "lpsketch/io.hpp"
#include "lpsketch/kernels.hpp"
#include "lpsketch/moments.hpp"
#include "lpsketch/projection.hpp"
#include "lpsketch/simlab.hpp"

namespace lpsketch {

namespace {

struct Reporter {
  std::ostream& os;
  bool all_ok = true;

  void check(const char* name, bool ok, const std::string& detail = "") {
    if (ok) {
      os << "ok " << name << "\n";
    } else {
      all_ok = false;
      os << "FAIL " << name << (detail.empty() ? "" : ": " + detail) << "\n";
    }
  }
};

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool block_equals(const kernels::PhiloxBlock& b, std::uint32_t w0, std::uint32_t w1,
                  std::uint32_t w2, std::uint32_t w3) {
  return b.w[0] == w0 && b.w[1] == w1 && b.w[2] == w2 && b.w[3] == w3;
}

DataVector random_dense(PhiloxEngine& eng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = eng.next_normal();
  return DataVector::dense(std::move(v));
}

void check_philox(Reporter& rep) {
  const bool zero = block_equals(kernels::philox4x32(0, 0, 0, 0, 0), 0x6627e8d5u,
                                 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u);
  const bool ff = block_equals(
      kernels::philox4x32(0xFFFFFFFFFFFFFFFFull, 0xffffffffu, 0xffffffffu, 0xffffffffu,
                          0xffffffffu),
      0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu);
  const bool pi = block_equals(
      kernels::philox4x32(0x299f31d0a4093822ull, 0x243f6a88u, 0x85a308d3u, 0x13198a2eu,
                          0x03707344u),
      0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u);
  rep.check("philox-kat", zero && ff && pi);
}

void check_quantile(Reporter& rep) {
  const double q975 = kernels::normal_quantile(0.975);
  const double q025 = kernels::normal_quantile(0.025);
  const double qtail = kernels::normal_quantile(1e-12);
  bool ok = std::fabs(q975 - 1.959963984540054) < 1e-13;
  ok = ok && std::fabs(q025 + q975) < 1e-14;
  ok = ok && bits_equal(kernels::normal_quantile(0.4), -kernels::normal_quantile(0.6));
  ok = ok && std::fabs(qtail + 7.034483825301131) < 1e-12;
  ok = ok && kernels::normal_quantile(0.5) == 0.0;
  rep.check("quantile-spot", ok);

  PhiloxEngine eng(7, 0);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += eng.next_uniform();
  mean /= n;
  rep.check("uniform-mean", std::fabs(mean - 0.5) < 0.01);
}

void check_kernel_equivalence(Reporter& rep) {
  const auto isas = kernels::available_isas();
  const std::size_t n = 257;
  const std::uint64_t key = kernels::stream_key(99, 1);
  const kernels::ThreePointParams tp{1.0 / 6.0, 5.0 / 6.0, std::sqrt(3.0)};

  std::vector<double> ref_n(n), ref_t(n), a(n), b(n);
  kernels::force_isa(kernels::Isa::scalar);
  kernels::fill_normal_row(key, 3, n, ref_n.data());
  kernels::fill_three_point_row(key, 4, n, tp, ref_t.data());
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = ref_n[i];
    b[i] = ref_t[i] + 0.25;
  }
  const double ref_dot = kernels::dot(a.data(), b.data(), n);

  bool ok = true;
  std::string detail;
  for (const auto isa : isas) {
    if (isa == kernels::Isa::scalar) continue;
    kernels::force_isa(isa);
    std::vector<double> got(n);
    kernels::fill_normal_row(key, 3, n, got.data());
    for (std::size_t i = 0; i < n; ++i)
      if (!bits_equal(got[i], ref_n[i])) ok = false;
    kernels::fill_three_point_row(key, 4, n, tp, got.data());
    for (std::size_t i = 0; i < n; ++i)
      if (!bits_equal(got[i], ref_t[i])) ok = false;
    if (!bits_equal(kernels::dot(a.data(), b.data(), n), ref_dot)) ok = false;
    if (!ok && detail.empty()) detail = std::string("mismatch on ") + kernels::isa_name(isa);
  }
  kernels::force_isa(kernels::Isa::scalar);
  kernels::force_isa(isas.back());
  rep.check("kernel-equivalence", ok, detail);
}

void check_hand_values(Reporter& rep) {
  const auto x = DataVector::dense({1.0, 0.0});
  const auto y = DataVector::dense({0.0, 1.0});
  const MomentTable m = compute_moments(x, y);
  const bool ok = std::fabs(var_3p(m, 1) - 68.0) <= 1e-12 &&
                  std::fabs(delta_1p(m, 1) + 64.0) <= 1e-12 &&
                  std::fabs(var_1p(m, 1) - 4.0) <= 1e-12 &&
                  std::fabs(var_1p_identity(m, 1) - 8.0) <= 1e-12 &&
                  std::fabs(var_3p_margin_asymptotic(m, 1) - 68.0) <= 1e-12;
  rep.check("hand-variances", ok);
}

void check_identity_zero(Reporter& rep) {
  bool ok = true;
  for (int trial = 0; trial < 10 && ok; ++trial) {
    PhiloxEngine eng(1000 + trial, 2);
    const DataVector x = random_dense(eng, 40);
    const ProjectionSpec spec{static_cast<std::uint64_t>(7000 + trial), 16,
                              Scheme::one_matrix, Distribution::normal(), 40};
    const Sketch sx = sketch_vector(x, spec, 3);
    const Sketch sy = sketch_vector(x, spec, 3);
    if (est_1p_identity(sx, sy).value != 0.0) ok = false;
    const MomentTable m = compute_moments(x, x);
    if (std::fabs(var_1p_identity(m, 16)) > 1e-10 * var_3p(m, 16)) ok = false;
  }
  rep.check("identity-zero", ok);
}

void check_cubic(Reporter& rep) {
  bool ok = true;
  PhiloxEngine eng(5, 3);
  for (int trial = 0; trial < 20 && ok; ++trial) {
    const double m1 = 0.5 + 4.0 * eng.next_uniform();
    const double m2 = 0.5 + 4.0 * eng.next_uniform();
    const double rho = 2.0 * eng.next_uniform() - 1.0;
    const double a_true = rho * std::sqrt(m1 * m2);
    const std::uint32_t k = 8;
    const CubicInputs c{a_true * k, m1 * k, m2 * k, m1, m2, k};
    const double got = solve_margin_cubic(c);
    if (std::fabs(got - a_true) > 1e-10 * std::max(1.0, std::fabs(a_true))) ok = false;
  }
  if (solve_margin_cubic(CubicInputs{3.0, 1.0, 1.0, 0.0, 2.0, 4}) != 0.0) ok = false;
  rep.check("cubic-factorization", ok);
}

void check_lemma4(Reporter& rep) {
  std::vector<double> zc(1001, 1.0);
  zc[0] = 10.0;
  const DataVector bad = DataVector::dense(zc);
  const Lemma4Result r_bad = lemma4_condition(bad, bad);
  const DataVector ones = DataVector::dense(std::vector<double>(8, 1.0));
  const Lemma4Result r_ok = lemma4_condition(ones, ones);
  rep.check("lemma4-condition", !r_bad.holds && r_bad.lhs < 0.0 && r_ok.holds);
}

void check_d6_decomposition(Reporter& rep) {
  const auto x = DataVector::dense({1.0});
  const auto y = DataVector::dense({2.0});
  const MomentTable m = compute_moments(x, y);
  const double via_moments = m.s(6, 0) + m.s(0, 6) - 20.0 * m.s(3, 3) +
                             15.0 * m.s(2, 4) + 15.0 * m.s(4, 2) - 6.0 * m.s(5, 1) -
                             6.0 * m.s(1, 5);
  rep.check("d6-decomposition",
            std::fabs(via_moments - 1.0) <= 1e-12 && exact_lp(x, y, 6) == 1.0);
}

void check_holder(Reporter& rep) {
  bool ok = true;
  std::vector<double> spike(64, 0.0);
  spike[13] = 3.7;
  const DataVector zs = DataVector::dense(spike);
  const DataVector zc = DataVector::dense(std::vector<double>(64, 0.5));
  for (const int p : {4, 6, 8}) {
    if (std::fabs(complexity_ratio(zs, p) - 1.0) > 1e-12) ok = false;
  }
  const double dpow = std::pow(64.0, 0.5);
  PhiloxEngine eng(17, 4);
  const DataVector zr = random_dense(eng, 64);
  if (complexity_ratio(zr, 4) > dpow + 1e-9) ok = false;
  const double step1 = std::pow(complexity_ratio(zc, 4), 1.0);
  if (std::fabs(step1 - 1.0) > 1e-12) ok = false;
  rep.check("holder-bound", ok);
}

void check_roundtrip(Reporter& rep) {
  PhiloxEngine eng(31, 5);
  const std::size_t dim = 30;
  const DataVector x = random_dense(eng, dim);
  std::vector<std::uint32_t> idx{2, 7, 19};
  std::vector<double> val{1.5, -2.25, 0.75};
  const DataVector y = DataVector::sparse(dim, idx, val);
  const ProjectionSpec spec{77, 12, Scheme::one_matrix, Distribution::three_point(), dim};
  std::vector<Sketch> sk;
  sk.push_back(sketch_vector(x, spec, 5, Role::left, "x"));
  sk.push_back(sketch_vector(y, spec, 5, Role::left, "y"));
  std::stringstream ss;
  save_sketches(ss, sk);
  const std::vector<Sketch> got = load_sketches(ss);
  bool ok = got.size() == 2 && got[0].vector_id() == "x" && got[1].vector_id() == "y";
  if (ok) {
    for (std::size_t s = 0; s < 2 && ok; ++s) {
      for (int r = 1; r <= 5 && ok; ++r)
        for (std::size_t j = 0; j < spec.k && ok; ++j)
          ok = bits_equal(got[s].power(r)[j], sk[s].power(r)[j]);
      for (int q = 2; q <= 10 && ok; q += 2) ok = bits_equal(got[s].margin(q), sk[s].margin(q));
    }
  }
  if (ok) ok = bits_equal(est_1p(got[0], got[1]).value, est_1p(sk[0], sk[1]).value);
  rep.check("sketch-roundtrip", ok);
}

void check_moments_oracle(Reporter& rep) {
  PhiloxEngine eng(47, 6);
  const std::size_t dim = 25;
  std::vector<double> xs(dim), ys(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    xs[i] = eng.next_normal();
    ys[i] = (i % 3 == 0) ? 0.0 : eng.next_normal();
  }
  const DataVector x = DataVector::dense(xs);
  const DataVector y = DataVector::dense(ys);
  const MomentTable m = compute_moments(x, y);
  bool ok = true;
  for (int a = 0; a <= 6 && ok; ++a) {
    for (int b = 0; a + b <= 8 && b <= 6 && ok; ++b) {
      long double ref = 0.0L;
      for (std::size_t i = 0; i < dim; ++i)
        ref += std::pow(static_cast<long double>(xs[i]), a) *
               std::pow(static_cast<long double>(ys[i]), b);
      const double rd = static_cast<double>(ref);
      if (std::fabs(m.s(a, b) - rd) > 1e-11 * std::max(1.0, std::fabs(rd))) ok = false;
    }
  }
  rep.check("moments-oracle", ok);
}

void check_unbiased_smoke(Reporter& rep) {
  PhiloxEngine eng(52, 7);
  const std::size_t dim = 12;
  const DataVector x = random_dense(eng, dim);
  const DataVector y = random_dense(eng, dim);
  const double d4 = exact_lp(x, y, 4);
  const int n = 4000;
  const std::uint32_t k = 32;
  CompensatedSum sum, sumsq;
  for (int t = 0; t < n; ++t) {
    const ProjectionSpec spec{kernels::derive_seed(900, t), k, Scheme::one_matrix,
                              Distribution::normal(), dim};
    const double v = est_1p(sketch_vector(x, spec, 3), sketch_vector(y, spec, 3)).value;
    sum.add(v);
    sumsq.add(v * v);
  }
  const double mean = sum.value() / n;
  const double var = sumsq.value() / n - mean * mean;
  const double se = std::sqrt(var / n);
  rep.check("unbiased-smoke", std::fabs(mean - d4) < 4.0 * se,
            "mean " + format_real(mean) + " vs " + format_real(d4));
}

}  // namespace

bool run_verify(std::ostream& os) {
  Reporter rep{os};
  check_philox(rep);
  check_quantile(rep);
  check_kernel_equivalence(rep);
  check_hand_values(rep);
  check_identity_zero(rep);
  check_cubic(rep);
  check_lemma4(rep);
  check_d6_decomposition(rep);
  check_holder(rep);
  check_roundtrip(rep);
  check_moments_oracle(rep);
  check_unbiased_smoke(rep);
  os << (rep.all_ok ? "verify: all checks passed\n" : "verify: FAILURES present\n");
  return rep.all_ok;
}

}  // namespace lpsketch
