#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rmlab/b_factors.hpp"
#include "rmlab/errors.hpp"
#include "rmlab/matrix.hpp"
#include "rmlab/rng.hpp"
#include "rmlab/spectral.hpp"

using rmlab::BFactorKind;
using rmlab::BFactorSpec;
using rmlab::Matrix;

namespace {

BFactorSpec base(BFactorKind kind, std::size_t n, std::size_t N) {
  BFactorSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.N = N;
  return spec;
}

// Max |(B B^T)_ij - target_ij| against a diagonal target.
double gram_rows_error(const Matrix& b, const std::vector<double>& diag) {
  const Matrix bbt = rmlab::multiply(b, rmlab::transpose(b));
  double worst = 0.0;
  for (std::size_t i = 0; i < bbt.rows(); ++i) {
    for (std::size_t j = 0; j < bbt.cols(); ++j) {
      const double target = (i == j) ? diag[i] : 0.0;
      worst = std::max(worst, std::abs(bbt(i, j) - target));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("identity factor embeds the identity") {
  const Matrix b = rmlab::build_b(base(BFactorKind::Identity, 3, 7), 1);
  REQUIRE(b.rows() == 3);
  REQUIRE(b.cols() == 7);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 7; ++j) CHECK(b(i, j) == (i == j ? 1.0 : 0.0));
  }
  CHECK(rmlab::spectral_norm(b).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(rmlab::build_b(base(BFactorKind::Identity, 5, 4), 1), rmlab::DimensionError);
}

TEST_CASE("orthogonal projection has the requested rank") {
  auto spec = base(BFactorKind::OrthogonalProjection, 6, 24);
  spec.rank = 4;
  const Matrix b = rmlab::build_b(spec, 17);
  REQUIRE(b.rows() == 6);
  REQUIRE(b.cols() == 24);

  std::vector<double> diag{1.0, 1.0, 1.0, 1.0, 0.0, 0.0};
  CHECK(gram_rows_error(b, diag) < 1e-10);
  CHECK(rmlab::spectral_norm(b).value == doctest::Approx(1.0).epsilon(1e-9));

  const std::vector<double> sv = rmlab::singular_values_full(b);
  std::size_t near_one = 0;
  for (double s : sv) {
    if (s > 0.5) ++near_one;
    CHECK(s <= 1.0 + 1e-10);
  }
  CHECK(near_one == 4);

  spec.rank = 7;
  CHECK_THROWS_AS(rmlab::build_b(spec, 17), rmlab::ConfigError);
}

TEST_CASE("projection is seed-deterministic and seed-sensitive") {
  auto spec = base(BFactorKind::OrthogonalProjection, 5, 20);
  spec.rank = 5;
  const Matrix b1 = rmlab::build_b(spec, 7);
  const Matrix b2 = rmlab::build_b(spec, 7);
  const Matrix b3 = rmlab::build_b(spec, 8);
  for (std::size_t i = 0; i < b1.entries().size(); ++i) CHECK(b1.entries()[i] == b2.entries()[i]);
  bool differs = false;
  for (std::size_t i = 0; i < b1.entries().size() && !differs; ++i) {
    differs = b1.entries()[i] != b3.entries()[i];
  }
  CHECK(differs);
}

TEST_CASE("row selection picks distinct standard basis rows") {
  auto spec = base(BFactorKind::RowSelection, 4, 12);
  const Matrix b = rmlab::build_b(spec, 23);
  std::set<std::size_t> picked;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    std::size_t ones = 0;
    std::size_t where = 0;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      CHECK((b(i, j) == 0.0 || b(i, j) == 1.0));
      if (b(i, j) == 1.0) {
        ++ones;
        where = j;
      }
    }
    CHECK(ones == 1);
    picked.insert(where);
  }
  CHECK(picked.size() == 4);

  spec.indices = {2, 9, 5, 11};
  const Matrix explicit_b = rmlab::build_b(spec, 23);
  for (std::size_t i = 0; i < 4; ++i) CHECK(explicit_b(i, spec.indices[i]) == 1.0);

  spec.indices = {2, 2, 5, 11};
  CHECK_THROWS_AS(rmlab::build_b(spec, 23), rmlab::ConfigError);
  spec.indices = {2, 9, 5, 12};
  CHECK_THROWS_AS(rmlab::build_b(spec, 23), rmlab::ConfigError);
  spec.indices = {2, 9, 5};
  CHECK_THROWS_AS(rmlab::build_b(spec, 23), rmlab::ConfigError);
}

TEST_CASE("diagonal column norms, square and wide") {
  // N <= n: plain diagonal placement.
  auto spec = base(BFactorKind::DiagonalColumnNorms, 5, 4);
  spec.norms = {0.9, 0.1, 0.5, 0.0};
  const Matrix b = rmlab::build_b(spec, 3);
  const std::vector<double> realized = rmlab::column_norms(b);
  for (std::size_t j = 0; j < 4; ++j) CHECK(realized[j] == doctest::Approx(spec.norms[j]).epsilon(1e-12));
  CHECK(rmlab::spectral_norm(b).value == doctest::Approx(0.9).epsilon(1e-10));

  // N > n: needs the interlacing construction; norms are still met exactly
  // and the operator norm stays at most 1.
  auto wide = base(BFactorKind::DiagonalColumnNorms, 5, 40);
  rmlab::Rng rng(11);
  wide.norms.resize(40);
  double sum_sq = 0.0;
  for (auto& v : wide.norms) {
    v = 0.05 + 0.3 * rng.next_unit();
    sum_sq += v * v;
  }
  REQUIRE(sum_sq <= 5.0);  // feasibility: sum of squares within the row count
  const Matrix bw = rmlab::build_b(wide, 29);
  const std::vector<double> got = rmlab::column_norms(bw);
  for (std::size_t j = 0; j < 40; ++j) CHECK(got[j] == doctest::Approx(wide.norms[j]).epsilon(1e-9));
  CHECK(rmlab::spectral_norm(bw).value <= 1.0 + 1e-9);
}

TEST_CASE("diagonal column norms near the feasibility boundary") {
  auto spec = base(BFactorKind::DiagonalColumnNorms, 4, 16);
  // Sum of squared norms just under n = 4.
  spec.norms.assign(16, std::sqrt(4.0 / 16.0) * 0.999);
  const Matrix b = rmlab::build_b(spec, 5);
  const std::vector<double> got = rmlab::column_norms(b);
  for (std::size_t j = 0; j < 16; ++j) CHECK(got[j] == doctest::Approx(spec.norms[j]).epsilon(1e-9));
  CHECK(rmlab::spectral_norm(b).value <= 1.0 + 1e-9);
}

TEST_CASE("diagonal column norms shorthand and infeasible profiles") {
  auto spec = base(BFactorKind::DiagonalColumnNorms, 3, 9);
  spec.norm_value = 0.4;
  const Matrix b = rmlab::build_b(spec, 31);
  for (double c : rmlab::column_norms(b)) CHECK(c == doctest::Approx(0.4).epsilon(1e-9));

  // A single column norm above 1 contradicts ||B|| <= 1.
  auto bad = base(BFactorKind::DiagonalColumnNorms, 3, 3);
  bad.norms = {1.2, 0.1, 0.1};
  CHECK_THROWS_AS(rmlab::build_b(bad, 1), rmlab::InvariantError);

  // Total mass above n contradicts ||B||_HS^2 <= n ||B||^2.
  auto heavy = base(BFactorKind::DiagonalColumnNorms, 2, 12);
  heavy.norms.assign(12, 0.75);
  CHECK_THROWS_AS(rmlab::build_b(heavy, 1), rmlab::InvariantError);

  auto wrong_len = base(BFactorKind::DiagonalColumnNorms, 3, 5);
  wrong_len.norms = {0.5, 0.5};
  CHECK_THROWS_AS(rmlab::build_b(wrong_len, 1), rmlab::ConfigError);
}

TEST_CASE("scaled random orthonormal rows") {
  auto spec = base(BFactorKind::ScaledRandomOrthonormalRows, 6, 18);
  spec.scale = 0.7;
  const Matrix b = rmlab::build_b(spec, 41);
  std::vector<double> diag(6, 0.49);
  CHECK(gram_rows_error(b, diag) < 1e-9);
  CHECK(rmlab::spectral_norm(b).value == doctest::Approx(0.7).epsilon(1e-9));

  spec.scale = 1.5;
  CHECK_THROWS_AS(rmlab::build_b(spec, 41), rmlab::ConfigError);
  spec.scale = 0.0;
  CHECK_THROWS_AS(rmlab::build_b(spec, 41), rmlab::ConfigError);
}

TEST_CASE("column split against a hand-computed threshold") {
  // eps = 0.5 gives exponent K = 1/2 + 1/eps = 2.5 on log(2n).
  auto spec = base(BFactorKind::DiagonalColumnNorms, 8, 8);
  const double threshold = std::pow(std::log(16.0), -2.5);
  spec.norms.assign(8, 0.0);
  spec.norms[0] = 0.9;                 // large
  spec.norms[1] = threshold * 1.01;    // barely large
  spec.norms[2] = threshold * 0.99;    // barely small
  spec.norms[3] = 0.0;                 // small
  spec.norms[4] = threshold;           // exactly at the cut: not strictly above
  const Matrix b = rmlab::build_b(spec, 2);

  const rmlab::ColumnSplit split = rmlab::column_split(b, 0.5);
  CHECK(split.threshold == doctest::Approx(threshold).epsilon(1e-12));
  const std::set<std::size_t> large(split.large.begin(), split.large.end());
  CHECK(large.count(0) == 1);
  CHECK(large.count(1) == 1);
  CHECK(large.count(2) == 0);
  CHECK(large.count(4) == 0);
  CHECK(split.large.size() + split.small.size() == 8);

  // Identity columns all have norm 1: every column is large, and the
  // cardinality cap n log^5(2n) comfortably absorbs that.
  const Matrix id = rmlab::build_b(base(BFactorKind::Identity, 8, 8), 1);
  const rmlab::ColumnSplit all_large = rmlab::column_split(id, 0.5);
  CHECK(all_large.large.size() == 8);
  CHECK(all_large.small.empty());

  CHECK_THROWS_AS(rmlab::column_split(b, 0.0), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::column_split(b, 0.5, -1.0), rmlab::ConfigError);
}

TEST_CASE("b factor JSON round trips and rejections") {
  auto spec = base(BFactorKind::DiagonalColumnNorms, 4, 10);
  spec.norm_value = 0.3;
  const BFactorSpec back = rmlab::b_factor_from_json(rmlab::b_factor_to_json(spec));
  CHECK(back.kind == spec.kind);
  CHECK(back.norm_value == spec.norm_value);

  auto proj = base(BFactorKind::OrthogonalProjection, 6, 12);
  proj.rank = 3;
  const BFactorSpec proj_back = rmlab::b_factor_from_json(rmlab::b_factor_to_json(proj));
  CHECK(proj_back.rank == 3);

  auto rows = base(BFactorKind::RowSelection, 2, 9);
  rows.indices = {4, 7};
  const BFactorSpec rows_back = rmlab::b_factor_from_json(rmlab::b_factor_to_json(rows));
  REQUIRE(rows_back.indices.size() == 2);
  CHECK(rows_back.indices[0] == 4);
  CHECK(rows_back.indices[1] == 7);

  CHECK_THROWS_AS(rmlab::b_factor_from_json("{}"), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::b_factor_from_json(R"({"kind":"Mystery"})"), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::b_factor_from_json(R"({"kind":"Identity","params":{"zzz":1}})"),
                  rmlab::ConfigError);
}

TEST_CASE("build_b rejects degenerate dimensions") {
  CHECK_THROWS_AS(rmlab::build_b(base(BFactorKind::Identity, 0, 4), 1), rmlab::ConfigError);
  CHECK_THROWS_AS(rmlab::build_b(base(BFactorKind::OrthogonalProjection, 9, 4), 1),
                  rmlab::DimensionError);
}
