#include "lpsketch/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lpsketch/moments.hpp"

namespace lpsketch {

kernels::ThreePointParams Distribution::three_point_params() const {
  if (kind == Kind::normal)
    throw std::logic_error("three_point_params: distribution is normal");
  const double s = (kind == Kind::three_point) ? 3.0 : this->s;
  kernels::ThreePointParams tp;
  tp.t_lo = 1.0 / (2.0 * s);
  tp.t_hi = 1.0 - 1.0 / (2.0 * s);
  tp.value = std::sqrt(s);
  return tp;
}

std::string Distribution::token() const {
  switch (kind) {
    case Kind::normal:
      return "normal";
    case Kind::three_point:
      return "3pt";
    case Kind::sparse_three_point: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "sparse:%.17g", s);
      return buf;
    }
  }
  throw std::logic_error("Distribution::token: bad kind");
}

Distribution Distribution::parse(const std::string& token) {
  if (token == "normal") return normal();
  if (token == "3pt") return three_point();
  const std::string prefix = "sparse:";
  if (token.rfind(prefix, 0) == 0) {
    const std::string num = token.substr(prefix.size());
    if (num.empty()) throw std::invalid_argument("Distribution::parse: empty s in '" + token + "'");
    char* end = nullptr;
    const double s = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size() || !std::isfinite(s))
      throw std::invalid_argument("Distribution::parse: bad s in '" + token + "'");
    return sparse_three_point(s);
  }
  throw std::invalid_argument("Distribution::parse: unknown distribution '" + token + "'");
}

int route_matrix(Scheme scheme, Role role, int power) {
  if (scheme == Scheme::one_matrix) {
    if (power < 1 || power > 5)
      throw std::invalid_argument("route_matrix: power must be in 1..5");
    return 1;
  }
  if (power < 1 || power > 3)
    throw std::invalid_argument("route_matrix: three_matrix power must be in 1..3");
  return role == Role::left ? power : 4 - power;
}

static int max_matrix_id(Scheme scheme) {
  return scheme == Scheme::one_matrix ? 1 : 3;
}

double matrix_entry(const ProjectionSpec& spec, int matrix_id, std::uint64_t i, std::uint32_t j) {
  if (matrix_id < 1 || matrix_id > max_matrix_id(spec.scheme))
    throw std::out_of_range("matrix_entry: matrix_id out of range for scheme");
  if (i >= spec.dim) throw std::out_of_range("matrix_entry: row out of range");
  if (j >= spec.k) throw std::out_of_range("matrix_entry: column out of range");
  const std::uint64_t key = kernels::stream_key(spec.seed, static_cast<std::uint64_t>(matrix_id));
  const std::uint64_t bits = kernels::stream_u64(key, i, j);
  const double u = kernels::unit_double(bits);
  if (spec.dist.is_normal()) return kernels::normal_quantile(u);
  return kernels::three_point_map(u, spec.dist.three_point_params());
}

Sketch::Sketch(std::string vector_id, ProjectionSpec spec, Role role, int max_power,
               std::vector<std::vector<double>> powers, std::vector<double> margins)
    : vector_id_(std::move(vector_id)),
      spec_(spec),
      role_(role),
      max_power_(max_power),
      powers_(std::move(powers)),
      margins_(std::move(margins)) {
  if (max_power_ != 3 && max_power_ != 5)
    throw std::invalid_argument("Sketch: max_power must be 3 or 5");
  if (spec_.scheme == Scheme::three_matrix && max_power_ != 3)
    throw std::invalid_argument("Sketch: three_matrix scheme implies max_power 3");
  if (spec_.k == 0) throw std::invalid_argument("Sketch: k must be positive");
  if (powers_.size() != static_cast<std::size_t>(max_power_))
    throw std::invalid_argument("Sketch: expected one image per power 1..max_power");
  for (const auto& img : powers_)
    if (img.size() != spec_.k)
      throw std::invalid_argument("Sketch: image length does not match k");
  if (margins_.size() != static_cast<std::size_t>(max_power_))
    throw std::invalid_argument("Sketch: expected margins for q = 2,4,..,2*max_power");
}

const std::vector<double>& Sketch::power(int r) const {
  if (r < 1 || r > max_power_) throw std::out_of_range("Sketch::power: r out of range");
  return powers_[static_cast<std::size_t>(r - 1)];
}

double Sketch::margin(int q) const {
  if (q < 2 || q > 2 * max_power_ || q % 2 != 0)
    throw std::out_of_range("Sketch::margin: q must be even in 2..2*max_power");
  return margins_[static_cast<std::size_t>(q / 2 - 1)];
}

std::vector<std::vector<double>> project_power_images(
    const DataVector& x, const ProjectionSpec& spec,
    const std::vector<std::pair<int, int>>& routes) {
  if (spec.k == 0) throw std::invalid_argument("project_power_images: k must be positive");
  if (x.dim() != spec.dim)
    throw std::invalid_argument("project_power_images: vector dim does not match spec");
  int max_pow = 0;
  for (const auto& [power, matrix_id] : routes) {
    if (power < 1 || power > 5)
      throw std::invalid_argument("project_power_images: power must be in 1..5");
    if (matrix_id < 1 || matrix_id > max_matrix_id(spec.scheme))
      throw std::invalid_argument("project_power_images: matrix_id out of range for scheme");
    max_pow = std::max(max_pow, power);
  }

  // Group routes by matrix so each row stream is generated once per nonzero.
  std::vector<int> matrices;
  for (const auto& [power, matrix_id] : routes)
    if (std::find(matrices.begin(), matrices.end(), matrix_id) == matrices.end())
      matrices.push_back(matrix_id);
  std::sort(matrices.begin(), matrices.end());

  const std::size_t k = spec.k;
  std::vector<std::vector<double>> images(routes.size(), std::vector<double>(k, 0.0));
  if (routes.empty()) return images;

  std::vector<std::uint64_t> keys;
  for (int m : matrices) keys.push_back(kernels::stream_key(spec.seed, static_cast<std::uint64_t>(m)));

  const bool is_normal = spec.dist.is_normal();
  kernels::ThreePointParams tp{};
  if (!is_normal) tp = spec.dist.three_point_params();

  std::vector<double> row(k);
  double xpow[6];
  x.for_each_nonzero([&](std::uint64_t i, double xv) {
    xpow[1] = xv;
    for (int r = 2; r <= max_pow; ++r) xpow[r] = xpow[r - 1] * xv;
    for (std::size_t mi = 0; mi < matrices.size(); ++mi) {
      if (is_normal)
        kernels::fill_normal_row(keys[mi], i, k, row.data());
      else
        kernels::fill_three_point_row(keys[mi], i, k, tp, row.data());
      for (std::size_t ri = 0; ri < routes.size(); ++ri)
        if (routes[ri].second == matrices[mi])
          kernels::axpy(images[ri].data(), xpow[routes[ri].first], row.data(), k);
    }
  });
  return images;
}

Sketch sketch_vector(const DataVector& x, const ProjectionSpec& spec, int max_power,
                     Role role, std::string vector_id) {
  if (max_power != 3 && max_power != 5)
    throw std::invalid_argument("sketch_vector: max_power must be 3 or 5");
  if (spec.scheme == Scheme::three_matrix && max_power != 3)
    throw std::invalid_argument("sketch_vector: three_matrix scheme implies max_power 3");
  std::vector<std::pair<int, int>> routes;
  for (int r = 1; r <= max_power; ++r) routes.emplace_back(r, route_matrix(spec.scheme, role, r));
  auto images = project_power_images(x, spec, routes);
  std::vector<double> margins;
  for (int q = 2; q <= 2 * max_power; q += 2) margins.push_back(power_sum(x, q));
  return Sketch(std::move(vector_id), spec, role, max_power, std::move(images), std::move(margins));
}

}  // namespace lpsketch
