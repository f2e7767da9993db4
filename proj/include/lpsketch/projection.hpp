#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lpsketch/data_vector.hpp"
#include "lpsketch/kernels.hpp"

namespace lpsketch {

enum class Scheme { one_matrix, three_matrix };
enum class Role { left, right };

struct Distribution {
  enum class Kind { normal, three_point, sparse_three_point };
  Kind kind = Kind::normal;
  double s = 3.0;  // sparsity parameter, sparse_three_point only

  static Distribution normal() { return {Kind::normal, 3.0}; }
  static Distribution three_point() { return {Kind::three_point, 3.0}; }
  static Distribution sparse_three_point(double s) {
    if (!(s >= 1.0))
      throw std::invalid_argument("sparse_three_point: s must be >= 1");
    return {Kind::sparse_three_point, s};
  }

  bool operator==(const Distribution&) const = default;

  bool is_normal() const { return kind == Kind::normal; }
  kernels::ThreePointParams three_point_params() const;

  // normal | 3pt | sparse:<s>
  std::string token() const;
  static Distribution parse(const std::string& token);
};

struct ProjectionSpec {
  std::uint64_t seed = 0;
  std::uint32_t k = 0;
  Scheme scheme = Scheme::one_matrix;
  Distribution dist;
  std::size_t dim = 0;

  bool operator==(const ProjectionSpec&) const = default;
};

// Matrix routing. OneMatrix puts every power on matrix 1. ThreeMatrix gives
// each estimated inner product its own matrix: a left sketch routes power r
// to matrix r, a right sketch routes r to 4-r, so the estimator pairings
// (u2,v2), (u3,v1), (u1,v3) land on matrices 2, 3, 1 respectively and the
// three cross products stay mutually independent.
int route_matrix(Scheme scheme, Role role, int power);

// One projection-matrix entry R^(matrixId)[i,j], generated on the fly from
// the keyed counter stream; never materialized as a matrix.
double matrix_entry(const ProjectionSpec& spec, int matrix_id, std::uint64_t i, std::uint32_t j);

class Sketch {
 public:
  Sketch() = default;
  Sketch(std::string vector_id, ProjectionSpec spec, Role role, int max_power,
         std::vector<std::vector<double>> powers, std::vector<double> margins);

  const std::string& vector_id() const { return vector_id_; }
  const ProjectionSpec& spec() const { return spec_; }
  Role role() const { return role_; }
  int max_power() const { return max_power_; }

  // r in 1..max_power
  const std::vector<double>& power(int r) const;
  // q even, 2..2*max_power
  double margin(int q) const;
  const std::vector<double>& margins_raw() const { return margins_; }

 private:
  std::string vector_id_;
  ProjectionSpec spec_;
  Role role_ = Role::left;
  int max_power_ = 0;
  std::vector<std::vector<double>> powers_;  // powers_[r-1]
  std::vector<double> margins_;              // margins_[q/2-1] = sum x^q
};

Sketch sketch_vector(const DataVector& x, const ProjectionSpec& spec, int max_power,
                     Role role = Role::left, std::string vector_id = "");

// Low-level building block: the k-vector images sum_i x_i^power R^(m)[i,j]
// for an explicit (power, matrix) route list. Rows of each matrix are
// generated once per appearance of that matrix in the list.
std::vector<std::vector<double>> project_power_images(
    const DataVector& x, const ProjectionSpec& spec,
    const std::vector<std::pair<int, int>>& routes);

}  // namespace lpsketch
