#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rmlab/matrix.hpp"

namespace rmlab {

// Norm comparison constant of the Gaussianization step: passing from random
// signs to standard normal multipliers costs at most a factor sqrt(2 pi) in
// expected operator norm (1 / E|g| = sqrt(pi / 2) per entry, doubled by the
// symmetrization it replaces). The transform itself does not scale entries;
// callers apply this factor when comparing ensembles.
inline constexpr double kGaussianizationFactor = 2.5066282746310002;  // sqrt(2 pi)

// Entrywise sign randomization of a difference: epsilon_ij (a_ij - a'_ij)
// with independent fair signs drawn from signs_seed in row-major order.
Matrix symmetrize(const Matrix& a, const Matrix& a_prime,
                  std::uint64_t signs_seed);

// Entrywise Gaussian multipliers: g_ij a_ij with iid standard normals drawn
// from gauss_seed in row-major order.
Matrix gaussianize(const Matrix& a, std::uint64_t gauss_seed);

// Magnitude band filter: keeps a_ij iff |a_ij| lies in (lo, hi], zeroing the
// rest. hi may be infinity. The dyadic level-0 band [0, 1] is the lo = 0 case
// of this half-open convention: a zero entry is zero either way, so (0, 1]
// and [0, 1] select identical matrices.
Matrix truncate(const Matrix& a, double lo, double hi);

struct DyadicLevel {
  int k = 0;       // band (2^{k-1}, 2^k], k >= 1
  Matrix matrix;   // band entries scaled by 2^{-k}, so magnitudes in (1/2, 1]
};

// Magnitude decomposition a = level0 + sum_k 2^k levels[k-1].matrix where
// level0 holds the entries with |a_ij| <= 1. Powers of two are exact in
// binary floating point and each entry lives in exactly one band, so the
// reconstruction is bit-exact.
struct DyadicDecomposition {
  Matrix level0;
  std::vector<DyadicLevel> levels;
  int k0 = 0;           // number of scaled levels
  double eps = 0.0;     // moment exponent parameter; bands live under 2+eps
  double entry_bound = 0.0;  // admissibility cutoff (m_scale n / log 2N)^(1/(2+eps))
  // level_sparsity[k] is the fraction of entries in band k, k = 0..k0
  // (band 0 counts entries with 0 < |a_ij| <= 1).
  std::vector<double> level_sparsity;
};

// Splits a into magnitude bands. Requires every |a_ij| <= entry_bound where
// entry_bound = (m_scale n / log(2N))^(1/(2+eps)) with n = a.cols() and
// N = a.rows(); rejects otherwise, naming the offending entry. k0 is the
// largest k with 2^(k-1) <= entry_bound (zero when the bound is below 1, in
// which case every admissible entry already lies in band 0). The almost
// square call site uses the same function with eps/4 in place of eps.
DyadicDecomposition dyadic_decompose(const Matrix& a, double m_scale,
                                     double eps);

// level0 + sum_k 2^k levels[k].matrix, with exact power-of-two scaling.
Matrix dyadic_reconstruct(const DyadicDecomposition& d);

// CSV export with header "k,nonzero_fraction,predicted_p_k". Band k >= 1
// predicts p_k = 2^(-(2+eps)(k-1)); band 0 has no sparsity prediction beyond
// the trivial 1.
void write_dyadic_csv(std::ostream& out, const DyadicDecomposition& d);

// The three maxima of the row/column conditions at sparsity p, for A of
// shape N x n against the column norms of the left factor B (b_profile
// indexed by A's rows). implied_k is the smallest K satisfying both
// K-inequalities:
//   max_i ||row_i||_2        <= K sqrt(n p + log 2N)
//   max_j weighted col norm  <= K sqrt(n p + log 2n)
// The entry condition max |a_ij| <= 1 carries no K; its maximum is reported
// separately in max_abs_entry.
struct RowColBounds {
  double max_abs_entry = 0.0;
  double max_row_norm = 0.0;
  double max_col_weighted_norm = 0.0;
  double implied_k = 0.0;
};

RowColBounds row_col_bounds(const Matrix& a, const ColumnProfile& b_profile,
                            double p);

}  // namespace rmlab
