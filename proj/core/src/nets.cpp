#include "rmlab/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmlab/errors.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

namespace {

std::vector<double> random_unit(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : v) x = rng.next_normal();
    norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
  }
  for (double& x : v) x /= norm;
  return v;
}

// Squared distance between unit vectors via the inner product.
double unit_dist_sq(const std::vector<double>& a, const std::vector<double>& b) {
  double ip = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ip += a[i] * b[i];
  return std::max(0.0, 2.0 - 2.0 * ip);
}

std::vector<std::vector<double>> make_cloud(std::size_t n, std::size_t random_count,
                                            std::uint64_t seed) {
  std::vector<std::vector<double>> cloud;
  cloud.reserve(2 * n + random_count);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    cloud.push_back(e);
    e[i] = -1.0;
    cloud.push_back(std::move(e));
  }
  Rng rng(seed);
  for (std::size_t k = 0; k < random_count; ++k)
    cloud.push_back(random_unit(n, rng));
  return cloud;
}

std::vector<std::vector<double>> greedy_net(
    const std::vector<std::vector<double>>& cloud, double radius) {
  std::vector<std::vector<double>> net;
  net.push_back(cloud.front());
  std::vector<double> min_dist_sq(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    min_dist_sq[i] = unit_dist_sq(cloud[i], net.front());

  const double radius_sq = radius * radius;
  for (;;) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < cloud.size(); ++i)
      if (min_dist_sq[i] > min_dist_sq[far]) far = i;
    if (min_dist_sq[far] <= radius_sq) break;
    net.push_back(cloud[far]);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      min_dist_sq[i] = std::min(min_dist_sq[i], unit_dist_sq(cloud[i], cloud[far]));
  }
  return net;
}

}  // namespace

double coverage_gap(const SphereNet& net, std::size_t trials,
                    std::uint64_t seed) {
  if (net.points.empty()) throw ConfigError("coverage_gap: empty net");
  Rng rng(seed);
  double worst_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = random_unit(net.dimension, rng);
    double best = 4.0;
    for (const auto& p : net.points)
      best = std::min(best, unit_dist_sq(x, p));
    worst_sq = std::max(worst_sq, best);
  }
  return std::sqrt(worst_sq);
}

SphereNet build_sphere_net(std::size_t n, double eps, std::uint64_t seed) {
  if (n < 1 || n > 14)
    throw GuardError("build_sphere_net: dimension " + std::to_string(n) +
                     " outside the guard range [1, 14]");
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("build_sphere_net: eps must lie in (0, 1), got " +
                      format_double(eps));

  const double cap = std::pow(1.0 + 2.0 / eps, static_cast<double>(n));
  std::size_t random_count = std::min<std::size_t>(
      150000, std::max<std::size_t>(2000, 400u << std::min<std::size_t>(n, 12)));
  double radius = 0.9 * eps;

  for (int attempt = 0; attempt < 4; ++attempt) {
    const auto cloud = make_cloud(n, random_count, mix_seed(seed, attempt));
    SphereNet net;
    net.dimension = n;
    net.eps = eps;
    net.points = greedy_net(cloud, radius);
    if (static_cast<double>(net.points.size()) > cap)
      throw InvariantError(
          "build_sphere_net: cardinality <= (1 + 2/eps)^n violated");
    if (coverage_gap(net, 1000, mix_seed(seed, 0xA0D17 + attempt)) <=
        eps + 1e-9)
      return net;
    // Coverage miss: densify the cloud and pack a little tighter.
    random_count = std::min<std::size_t>(400000, random_count * 2);
    radius *= 0.92;
  }
  throw InvariantError(
      "build_sphere_net: Monte Carlo coverage certificate failed after cloud "
      "densification");
}

LevelNet enumerate_level_net(std::size_t n, double level, double big_m) {
  if (n < 1) throw ConfigError("enumerate_level_net: n must be >= 1");
  if (!(big_m >= 2.0))
    throw ConfigError("enumerate_level_net: M must be >= 2, got " +
                      format_double(big_m));
  const double h = std::pow(2.0, level) / std::sqrt(static_cast<double>(n));
  if (h > 1.0)
    throw ConfigError("enumerate_level_net: grid value " + format_double(h) +
                      " exceeds 1; the support bound is empty");

  LevelNet net;
  net.level = level;
  net.grid_value = h;
  net.support_bound = static_cast<std::size_t>(std::floor(1.0 / (h * h)));
  const std::size_t max_support = std::min(net.support_bound, n);

  // Count sum_{l=1..max_support} C(n, l) 2^l before allocating anything.
  double count = 0.0;
  {
    double binom = 1.0;
    double pow2 = 1.0;
    for (std::size_t l = 1; l <= max_support; ++l) {
      binom *= static_cast<double>(n - l + 1) / static_cast<double>(l);
      pow2 *= 2.0;
      count += binom * pow2;
      if (count > 1e6)
        throw GuardError("enumerate_level_net: cardinality exceeds the 1e6 "
                         "guard");
    }
  }
  net.cardinality_constant =
      std::log(count) /
      (static_cast<double>(net.support_bound) * std::log(big_m));

  net.points.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> support;
  for (std::size_t l = 1; l <= max_support; ++l) {
    support.resize(l);
    std::iota(support.begin(), support.end(), std::size_t{0});
    for (;;) {
      const std::size_t patterns = std::size_t{1} << l;
      for (std::size_t mask = 0; mask < patterns; ++mask) {
        std::vector<double> x(n, 0.0);
        for (std::size_t b = 0; b < l; ++b)
          x[support[b]] = (mask >> b) & 1 ? h : -h;
        net.points.push_back(std::move(x));
      }
      // Advance to the next l-combination of [0, n).
      std::size_t i = l;
      while (i > 0 && support[i - 1] == n - l + i - 1) --i;
      if (i == 0) break;
      ++support[i - 1];
      for (std::size_t j = i; j < l; ++j) support[j] = support[j - 1] + 1;
    }
  }
  return net;
}

ClassifiedVector classify_vector(const std::vector<double>& x, double big_m) {
  if (x.empty()) throw ConfigError("classify_vector: empty vector");
  if (!(big_m > 0.0))
    throw ConfigError("classify_vector: M must be positive, got " +
                      format_double(big_m));
  const double n = static_cast<double>(x.size());
  double norm_sq = 0.0;
  for (double c : x) norm_sq += c * c;
  if (norm_sq > 1.0 + 1e-12)
    throw InvariantError("classify_vector: ||x||_2 <= 1 violated (norm " +
                         format_double(std::sqrt(norm_sq)) + ")");

  ClassifiedVector out;
  out.threshold = big_m / std::sqrt(n);
  out.spiky.assign(x.size(), 0.0);
  out.spread.assign(x.size(), 0.0);
  std::size_t spiky_count = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (std::abs(x[j]) > out.threshold) {
      out.spiky[j] = x[j];
      ++spiky_count;
    } else {
      out.spread[j] = x[j];
    }
  }
  if (static_cast<double>(spiky_count) >
      n / (big_m * big_m) * (1.0 + 1e-12))
    throw InvariantError(
        "classify_vector: spiky support <= n / M^2 violated");
  return out;
}

std::size_t sparse_support_budget(std::size_t n, double p, double c) {
  if (!(p > 0.0 && p <= 1.0))
    throw ConfigError("sparse_support_budget: p must lie in (0, 1], got " +
                      format_double(p));
  if (!(c > 0.0))
    throw ConfigError("sparse_support_budget: c must be positive");
  const double budget =
      c * static_cast<double>(n) * p / std::log(std::exp(1.0) / p);
  return static_cast<std::size_t>(std::floor(budget));
}

bool in_sparse_ball(const std::vector<double>& x, std::size_t budget) {
  double norm_sq = 0.0;
  std::size_t nnz = 0;
  for (double c : x) {
    norm_sq += c * c;
    if (c != 0.0) ++nnz;
  }
  return norm_sq <= 1.0 + 1e-12 && nnz <= budget;
}

bool in_spread_ball(const std::vector<double>& x, double big_m) {
  if (x.empty() || !(big_m > 0.0)) return false;
  const double threshold =
      big_m / std::sqrt(static_cast<double>(x.size()));
  double norm_sq = 0.0;
  for (double c : x) {
    if (std::abs(c) > threshold * (1.0 + 1e-12)) return false;
    norm_sq += c * c;
  }
  return norm_sq <= 1.0 + 1e-12;
}

Matrix points_to_matrix(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw ConfigError("points_to_matrix: no points");
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim)
      throw DimensionError("points_to_matrix: ragged point list");
  return Matrix::from_fn(points.size(), dim, [&](std::size_t i, std::size_t j) {
    return points[i][j];
  });
}

}  // namespace rmlab
