#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmlab/matrix.hpp"

namespace rmlab {

enum class BFactorKind {
  Identity,
  OrthogonalProjection,
  RowSelection,
  DiagonalColumnNorms,
  ScaledRandomOrthonormalRows,
};

/// Recipe for a deterministic n x N factor with operator norm at most 1.
struct BFactorSpec {
  BFactorKind kind = BFactorKind::Identity;
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t rank = 0;             // OrthogonalProjection: eigenvalue-1 count
  std::vector<double> norms;        // DiagonalColumnNorms: length-N profile
  double norm_value = -1.0;         // DiagonalColumnNorms: uniform shorthand
  double scale = 1.0;               // ScaledRandomOrthonormalRows, in (0, 1]
  std::vector<std::size_t> indices; // RowSelection: explicit coordinates
};

/// Realizes spec as an n x N matrix. Randomized kinds (projection, row
/// selection without explicit indices, orthonormal rows) are deterministic in
/// seed. Every realized factor satisfies operator norm <= 1 + 1e-10; an
/// infeasible column-norm profile (an entry > 1, or total squared mass > n)
/// is rejected with InvariantError citing the violated norm inequality.
Matrix build_b(const BFactorSpec& spec, std::uint64_t seed);

/// Index split of b's columns by norm against the threshold
/// c0_eps * log^{-K}(2n) with K = 1/2 + 1/eps and n = b.rows(): `large`
/// collects the columns strictly above it. The Markov bound
/// |large| <= c0_eps^-2 * n * log^{2K}(2n) is verified and holds for every
/// b with operator norm at most 1.
struct ColumnSplit {
  std::vector<std::size_t> large;
  std::vector<std::size_t> small;
  double threshold = 0.0;
};

ColumnSplit column_split(const Matrix& b, double eps, double c0_eps = 1.0);

/// JSON round-trip: {"kind": ..., "n": ..., "N": ..., "params": {...}}.
BFactorSpec b_factor_from_json(const std::string& text);
std::string b_factor_to_json(const BFactorSpec& spec);

std::string kind_name(BFactorKind k);

}  // namespace rmlab
