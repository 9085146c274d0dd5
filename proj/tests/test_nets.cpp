#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "rmlab/errors.hpp"
#include "rmlab/nets.hpp"
#include "rmlab/rng.hpp"

namespace {

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("sphere nets are unit, small, and covering") {
  for (std::size_t n = 1; n <= 5; ++n) {
    const rmlab::SphereNet net = rmlab::build_sphere_net(n, 0.5);
    CHECK(net.dimension == n);
    REQUIRE(!net.points.empty());
    const double cap = std::pow(5.0, static_cast<double>(n));  // (1 + 2/eps)^n at eps = 1/2
    CHECK(static_cast<double>(net.points.size()) <= cap);
    for (const auto& p : net.points) {
      REQUIRE(p.size() == n);
      CHECK(std::abs(norm2(p) - 1.0) < 1e-9);
    }
    CHECK(rmlab::coverage_gap(net, 2000) <= 0.5 + 1e-9);
  }
}

TEST_CASE("one dimensional net is exactly the two poles") {
  const rmlab::SphereNet net = rmlab::build_sphere_net(1, 0.5);
  REQUIRE(net.points.size() == 2);
  std::set<double> vals{net.points[0][0], net.points[1][0]};
  CHECK(vals.count(1.0) == 1);
  CHECK(vals.count(-1.0) == 1);
  CHECK(rmlab::coverage_gap(net, 500) < 1e-9);
}

TEST_CASE("coarser nets stay under their cardinality cap") {
  const rmlab::SphereNet net = rmlab::build_sphere_net(3, 0.9);
  const double cap = std::pow(1.0 + 2.0 / 0.9, 3.0);
  CHECK(static_cast<double>(net.points.size()) <= cap);
  CHECK(rmlab::coverage_gap(net, 2000) <= 0.9 + 1e-9);
}

TEST_CASE("sphere net guards") {
  CHECK_THROWS_AS(rmlab::build_sphere_net(15, 0.5), rmlab::GuardError);
  CHECK_THROWS_AS(rmlab::build_sphere_net(3, 0.0), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::build_sphere_net(3, 1.0), rmlab::ConfigError);
}

TEST_CASE("level net worked examples") {
  // n = 2, level 1/2: grid value 2^(1/2)/sqrt(2) = 1, support bound 1,
  // points are +-h e_1 and +-h e_2.
  const rmlab::LevelNet a = rmlab::enumerate_level_net(2, 0.5, 2.0);
  CHECK(a.grid_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.support_bound == 1);
  CHECK(a.points.size() == 4);

  // n = 3 with a fractional level chosen so the grid value is exactly 1:
  // 2^level = sqrt(3). Support bound 1 gives 6 signed basis vectors.
  const double level3 = std::log2(std::sqrt(3.0));
  const rmlab::LevelNet b = rmlab::enumerate_level_net(3, level3, 2.0);
  CHECK(b.grid_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.points.size() == 6);

  // n = 6 at level 0.66: grid value 2^0.66/sqrt(6) ~ 0.645, so the support
  // bound floor(h^-2) = 2 sits safely inside its bin (h^-2 ~ 2.40) and the
  // net has C(6,1) 2 + C(6,2) 4 = 72 points.
  const rmlab::LevelNet c = rmlab::enumerate_level_net(6, 0.66, 2.0);
  CHECK(c.grid_value ==
        doctest::Approx(std::exp2(0.66) / std::sqrt(6.0)).epsilon(1e-12));
  CHECK(c.support_bound == 2);
  CHECK(c.points.size() == 72);
}

TEST_CASE("level net points live on the grid inside the unit ball") {
  const rmlab::LevelNet net = rmlab::enumerate_level_net(5, 0.25, 2.0);
  const double h = net.grid_value;
  REQUIRE(h > 0.0);
  std::set<std::vector<double>> distinct;
  for (const auto& x : net.points) {
    REQUIRE(x.size() == 5);
    std::size_t support = 0;
    for (double v : x) {
      CHECK((v == 0.0 || v == h || v == -h));
      if (v != 0.0) ++support;
    }
    CHECK(support >= 1);
    CHECK(support <= net.support_bound);
    CHECK(norm2(x) <= 1.0 + 1e-12);
    distinct.insert(x);
  }
  CHECK(distinct.size() == net.points.size());

  // Cardinality constant inverts the definition |net| = exp(C s log M).
  const double expected_c = std::log(static_cast<double>(net.points.size())) /
                            (static_cast<double>(net.support_bound) * std::log(2.0));
  CHECK(net.cardinality_constant == doctest::Approx(expected_c).epsilon(1e-12));
}

TEST_CASE("level net guards") {
  // Grid value above 1 is meaningless for unit-ball vectors.
  CHECK_THROWS_AS(rmlab::enumerate_level_net(2, 1.0, 2.0), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::enumerate_level_net(3, 0.5, 1.5), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::enumerate_level_net(0, 0.5, 2.0), rmlab::ConfigError);
  // 2^(-3) / sqrt(40) is a tiny grid: the support bound explodes the count.
  CHECK_THROWS_AS(rmlab::enumerate_level_net(40, -3.0, 2.0), rmlab::GuardError);
}

TEST_CASE("classify_vector splits at M over sqrt n and recomposes exactly") {
  const std::size_t n = 16;
  const double big_m = 2.0;
  rmlab::Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(n);
    double s = 0.0;
    for (auto& v : x) {
      v = rng.next_normal();
      s += v * v;
    }
    const double scale = (0.1 + 0.9 * rng.next_unit()) / std::sqrt(s);
    for (auto& v : x) v *= scale;  // now ||x||_2 < 1

    const rmlab::ClassifiedVector cls = rmlab::classify_vector(x, big_m);
    CHECK(cls.threshold == doctest::Approx(big_m / std::sqrt(static_cast<double>(n))).epsilon(1e-15));
    REQUIRE(cls.spiky.size() == n);
    REQUIRE(cls.spread.size() == n);

    std::size_t spiky_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      // Bit-exact recomposition: each coordinate goes to exactly one side.
      CHECK((cls.spiky[i] == x[i] || cls.spread[i] == x[i]));
      CHECK(cls.spiky[i] + cls.spread[i] == x[i]);
      CHECK(std::abs(cls.spread[i]) <= cls.threshold);
      if (cls.spiky[i] != 0.0) {
        CHECK(std::abs(cls.spiky[i]) > cls.threshold);
        ++spiky_count;
      }
    }
    // At most n / M^2 coordinates can exceed M / sqrt(n) on the unit ball.
    CHECK(static_cast<double>(spiky_count) <=
          static_cast<double>(n) / (big_m * big_m) + 1e-12);
  }

  CHECK_THROWS_AS(rmlab::classify_vector(std::vector<double>(4, 10.0), 2.0),
                  rmlab::InvariantError);
  CHECK_THROWS_AS(rmlab::classify_vector({}, 2.0), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::classify_vector({0.5}, 0.0), rmlab::ConfigError);
}

TEST_CASE("sparse support budget and membership predicates") {
  // floor(c n p / log(e/p)) with c = 1/4: n = 1000, p = 0.1 gives
  // floor(25 / 3.302...) = floor(7.57) = 7.
  const std::size_t budget = rmlab::sparse_support_budget(1000, 0.1);
  CHECK(budget == 7);
  CHECK(rmlab::sparse_support_budget(1000, 0.1, 0.5) == 15);
  CHECK_THROWS_AS(rmlab::sparse_support_budget(10, 0.0), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::sparse_support_budget(10, 0.5, 0.0), rmlab::ConfigError);

  std::vector<double> x(10, 0.0);
  x[1] = 0.5;
  x[7] = -0.5;
  CHECK(rmlab::in_sparse_ball(x, 2));
  CHECK_FALSE(rmlab::in_sparse_ball(x, 1));

  std::vector<double> spread(16, 0.2);  // sup 0.2 <= 2/4, norm 0.8 <= 1
  CHECK(rmlab::in_spread_ball(spread, 2.0));
  spread[3] = 0.9;
  CHECK_FALSE(rmlab::in_spread_ball(spread, 2.0));
}

TEST_CASE("points_to_matrix lays out one point per row") {
  const rmlab::LevelNet net = rmlab::enumerate_level_net(2, 0.5, 2.0);
  const rmlab::Matrix m = rmlab::points_to_matrix(net.points);
  REQUIRE(m.rows() == net.points.size());
  REQUIRE(m.cols() == 2);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) CHECK(m(i, j) == net.points[i][j]);
  }
  CHECK_THROWS_AS(rmlab::points_to_matrix({}), rmlab::ConfigError);
}
