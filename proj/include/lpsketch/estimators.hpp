#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lpsketch/data_vector.hpp"
#include "lpsketch/moments.hpp"
#include "lpsketch/projection.hpp"

namespace lpsketch {

struct Estimate {
  std::string estimator_id;  // sampling | crs-var-only | 3p | 3p-m | 1p | 1p-m | 1p-i | exact | d6-1p
  double value = 0.0;
  std::optional<double> predicted_variance;
  std::uint32_t k = 0;
  int p = 4;
};

struct CubicInputs {
  double t = 0.0;   // u'v
  double su = 0.0;  // ||u||^2
  double sv = 0.0;  // ||v||^2
  double m1 = 0.0;  // first marginal moment, e.g. sum x^4
  double m2 = 0.0;  // second marginal moment, e.g. sum y^4
  std::uint32_t k = 1;
};

struct Lemma4Result {
  bool holds = false;
  double lhs = 0.0;
};

Estimate est_exact(const DataVector& x, const DataVector& y, int p = 4);

// Coordinate sampling with replacement; predicted variance per the
// closed-form sampling formula.
Estimate est_sampling(const DataVector& x, const DataVector& y, std::uint32_t k,
                      std::uint64_t seed);

double var_sampling(const MomentTable& m, std::uint32_t k);
double var_crs_predictor(const MomentTable& m, std::uint32_t k);

// Linear estimators from sketches. The optional MomentTable fills in
// predicted_variance from the matching closed-form formula.
Estimate est_3p(const Sketch& sx, const Sketch& sy, const MomentTable* moments = nullptr);
Estimate est_1p(const Sketch& sx, const Sketch& sy, const MomentTable* moments = nullptr);
Estimate est_3p_margin(const Sketch& sx, const Sketch& sy, const MomentTable* moments = nullptr);
Estimate est_1p_margin(const Sketch& sx, const Sketch& sy);
Estimate est_1p_identity(const Sketch& sx, const Sketch& sy, const MomentTable* moments = nullptr);
Estimate est_d6_1p(const Sketch& sx, const Sketch& sy);

double var_3p(const MomentTable& m, std::uint32_t k);
double delta_1p(const MomentTable& m, std::uint32_t k);
double var_1p(const MomentTable& m, std::uint32_t k);
double var_3p_margin_asymptotic(const MomentTable& m, std::uint32_t k);
double delta_identity(const MomentTable& m, std::uint32_t k);
double var_1p_identity(const MomentTable& m, std::uint32_t k);

// Selected real root of a^3 - (t/k)a^2 + a((m1*sv + m2*su)/k - m1*m2)
// - m1*m2*t/k = 0, clamped to [-sqrt(m1*m2), sqrt(m1*m2)].
double solve_margin_cubic(const CubicInputs& c);

// z_i = sqrt(x_i y_i): lhs = 5*Sz3*Sz5 - Sz2*Sz6, holds when lhs >= 0.
Lemma4Result lemma4_condition(const DataVector& x, const DataVector& y);

// Z_(p) = (sum z^2 * sum z^(2p-2)) / (sum z^p)^2 on |z|; even p >= 4.
double complexity_ratio(const DataVector& z, int p);

// Plug-in rule: est_1p_identity when the estimated similarity beta4 exceeds
// tau, est_1p otherwise. Experimental heuristic.
Estimate select_estimator(const Sketch& sx, const Sketch& sy, double tau = 0.9);

}  // namespace lpsketch
