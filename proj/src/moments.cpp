#include "lpsketch/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace lpsketch {

namespace {

// |x - y|^p for even p, built from squarings so the same value is produced
// wherever a difference power is needed.
inline double abs_diff_pow(double x, double y, int p) {
  double d = std::fabs(x - y);
  double d2 = d * d;
  switch (p) {
    case 2: return d2;
    case 4: return d2 * d2;
    case 6: return (d2 * d2) * d2;
    case 8: return (d2 * d2) * (d2 * d2);
    case 10: return ((d2 * d2) * (d2 * d2)) * d2;
    default: throw std::invalid_argument("abs_diff_pow: p must be even, 2..10");
  }
}

}  // namespace

MomentTable compute_moments(const DataVector& x, const DataVector& y) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("compute_moments: dimension mismatch");

  CompensatedSum s[7][7];
  CompensatedSum diff[4];

  for_each_union(x, y, [&](std::size_t, double xv, double yv) {
    double xp[7], yp[7];
    xp[0] = 1.0;
    yp[0] = 1.0;
    for (int r = 1; r <= 6; ++r) {
      xp[r] = xp[r - 1] * xv;
      yp[r] = yp[r - 1] * yv;
    }
    for (int a = 0; a <= 6; ++a)
      for (int b = 0; b <= 6 && a + b <= 8; ++b) {
        if (a == 0 && b == 0) continue;
        s[a][b].add(xp[a] * yp[b]);
      }
    double d = std::fabs(xv - yv);
    double d2 = d * d;
    diff[0].add(d2);
    diff[1].add(d2 * d2);
    diff[2].add((d2 * d2) * d2);
    diff[3].add((d2 * d2) * (d2 * d2));
  });

  MomentTable t(x.dim(), x.nonzero_count(), y.nonzero_count());
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6 && a + b <= 8; ++b) {
      if (a == 0 && b == 0) continue;
      t.set_s(a, b, s[a][b].value());
    }
  t.set_s(0, 0, static_cast<double>(x.dim()));
  for (int p = 2; p <= 8; p += 2) t.set_diff_pow(p, diff[p / 2 - 1].value());
  return t;
}

double exact_lp(const DataVector& x, const DataVector& y, int p) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("exact_lp: dimension mismatch");
  if (p < 2 || p > 10 || p % 2 != 0)
    throw std::invalid_argument("exact_lp: p must be even, 2..10");
  CompensatedSum acc;
  for_each_union(x, y, [&](std::size_t, double xv, double yv) {
    acc.add(abs_diff_pow(xv, yv, p));
  });
  return acc.value();
}

double power_sum(const DataVector& x, int q) {
  if (q < 1 || q > 10)
    throw std::invalid_argument("power_sum: q must be in 1..10");
  CompensatedSum acc;
  x.for_each_nonzero([&](std::size_t, double v) {
    double p = v;
    for (int r = 1; r < q; ++r) p *= v;
    acc.add(p);
  });
  return acc.value();
}

double beta4(const DataVector& x, const DataVector& y) {
  double denom = power_sum(x, 4) + power_sum(y, 4);
  if (denom == 0.0)
    throw std::domain_error("beta4: both fourth-power margins are zero");
  return 1.0 - exact_lp(x, y, 4) / denom;
}

double gaussian_quartic_expectation(const DataVector& a, const DataVector& b,
                                    const DataVector& c, const DataVector& d) {
  if (a.dim() != b.dim() || a.dim() != c.dim() || a.dim() != d.dim())
    throw std::invalid_argument("gaussian_quartic_expectation: dimension mismatch");
  auto ip = [](const DataVector& u, const DataVector& v) {
    CompensatedSum acc;
    for_each_union(u, v, [&](std::size_t, double uv, double vv) { acc.add(uv * vv); });
    return acc.value();
  };
  return ip(a, b) * ip(c, d) + ip(a, c) * ip(b, d) + ip(a, d) * ip(b, c);
}

}  // namespace lpsketch
