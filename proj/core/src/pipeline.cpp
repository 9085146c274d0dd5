#include "rmlab/pipeline.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <utility>

#include "rmlab/errors.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

Matrix symmetrize(const Matrix& a, const Matrix& a_prime,
                  std::uint64_t signs_seed) {
  if (!a.same_shape(a_prime)) {
    throw DimensionError("symmetrize: matrices must share a shape");
  }
  Rng rng(signs_seed);
  std::vector<double> out;
  out.reserve(a.entries().size());
  const auto& lhs = a.entries();
  const auto& rhs = a_prime.entries();
  for (std::size_t idx = 0; idx < lhs.size(); ++idx) {
    const double sign = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    out.push_back(sign * (lhs[idx] - rhs[idx]));
  }
  return Matrix(a.rows(), a.cols(), std::move(out));
}

Matrix gaussianize(const Matrix& a, std::uint64_t gauss_seed) {
  Rng rng(gauss_seed);
  std::vector<double> out;
  out.reserve(a.entries().size());
  for (double v : a.entries()) out.push_back(rng.next_normal() * v);
  return Matrix(a.rows(), a.cols(), std::move(out));
}

Matrix truncate(const Matrix& a, double lo, double hi) {
  if (!(lo >= 0.0)) throw ConfigError("truncate: lo must be >= 0");
  if (!(lo < hi)) throw ConfigError("truncate: band requires lo < hi");
  std::vector<double> out;
  out.reserve(a.entries().size());
  for (double v : a.entries()) {
    const double mag = std::fabs(v);
    out.push_back((mag > lo && mag <= hi) ? v : 0.0);
  }
  return Matrix(a.rows(), a.cols(), std::move(out));
}

DyadicDecomposition dyadic_decompose(const Matrix& a, double m_scale,
                                     double eps) {
  if (!(m_scale >= 1.0) || !std::isfinite(m_scale)) {
    throw ConfigError("dyadic_decompose: m_scale must be >= 1");
  }
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw ConfigError("dyadic_decompose: eps must lie in (0, 1)");
  }
  const double n_cols = static_cast<double>(a.cols());
  const double n_rows = static_cast<double>(a.rows());
  const double exponent = 2.0 + eps;
  const double bound =
      std::pow(m_scale * n_cols / std::log(2.0 * n_rows), 1.0 / exponent);

  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double mag = std::fabs(a(i, j));
      if (mag > bound) {
        std::ostringstream msg;
        msg << "dyadic_decompose: entry (" << i << ", " << j << ") = "
            << a(i, j) << " exceeds the admissible magnitude " << bound;
        throw InvariantError(msg.str());
      }
    }
  }

  // Largest k with 2^(k-1) <= bound; bound < 1 leaves only band 0.
  int k0 = 0;
  while (std::ldexp(1.0, k0) <= bound) ++k0;
  // Now 2^k0 > bound >= 2^(k0-1) whenever k0 >= 1.

  const std::size_t total = a.entries().size();
  std::vector<double> sparsity(static_cast<std::size_t>(k0) + 1, 0.0);

  std::vector<double> level0_entries;
  level0_entries.reserve(total);
  std::size_t level0_nonzero = 0;
  for (double v : a.entries()) {
    const double mag = std::fabs(v);
    if (mag > 0.0 && mag <= 1.0) {
      level0_entries.push_back(v);
      ++level0_nonzero;
    } else {
      level0_entries.push_back(0.0);
    }
  }
  sparsity[0] = static_cast<double>(level0_nonzero) / static_cast<double>(total);
  Matrix level0(a.rows(), a.cols(), std::move(level0_entries));

  std::vector<DyadicLevel> levels;
  levels.reserve(static_cast<std::size_t>(k0));
  for (int k = 1; k <= k0; ++k) {
    const double lo = std::ldexp(1.0, k - 1);
    const double hi = std::ldexp(1.0, k);
    std::vector<double> band;
    band.reserve(total);
    std::size_t nonzero = 0;
    for (double v : a.entries()) {
      const double mag = std::fabs(v);
      if (mag > lo && mag <= hi) {
        band.push_back(std::ldexp(v, -k));  // exact: scaling by 2^-k
        ++nonzero;
      } else {
        band.push_back(0.0);
      }
    }
    sparsity[static_cast<std::size_t>(k)] =
        static_cast<double>(nonzero) / static_cast<double>(total);
    levels.push_back(DyadicLevel{k, Matrix(a.rows(), a.cols(), std::move(band))});
  }

  return DyadicDecomposition{std::move(level0), std::move(levels), k0,
                             eps,  bound,        std::move(sparsity)};
}

Matrix dyadic_reconstruct(const DyadicDecomposition& d) {
  std::vector<double> out = d.level0.entries();
  for (const auto& level : d.levels) {
    if (!d.level0.same_shape(level.matrix)) {
      throw DimensionError("dyadic_reconstruct: level shape mismatch");
    }
    const auto& band = level.matrix.entries();
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
      if (band[idx] != 0.0) {
        // Bands are disjoint per position, so this adds onto a zero;
        // ldexp by +k undoes the exact 2^-k scaling bit for bit.
        out[idx] += std::ldexp(band[idx], level.k);
      }
    }
  }
  return Matrix(d.level0.rows(), d.level0.cols(), std::move(out));
}

void write_dyadic_csv(std::ostream& out, const DyadicDecomposition& d) {
  out << "k,nonzero_fraction,predicted_p_k\n";
  for (std::size_t k = 0; k < d.level_sparsity.size(); ++k) {
    const double predicted =
        (k == 0) ? 1.0
                 : std::exp2(-(2.0 + d.eps) * (static_cast<double>(k) - 1.0));
    out << k << ',' << format_double(d.level_sparsity[k]) << ','
        << format_double(predicted) << '\n';
  }
}

RowColBounds row_col_bounds(const Matrix& a, const ColumnProfile& b_profile,
                            double p) {
  if (b_profile.norms.size() != a.rows()) {
    throw DimensionError(
        "row_col_bounds: profile column count must equal the row count of a");
  }
  if (!(p > 0.0) || !(p <= 1.0)) {
    throw ConfigError("row_col_bounds: p must lie in (0, 1]");
  }
  RowColBounds result;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row_sq = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      row_sq += v * v;
      result.max_abs_entry = std::max(result.max_abs_entry, std::fabs(v));
    }
    result.max_row_norm = std::max(result.max_row_norm, std::sqrt(row_sq));
  }
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double col_sq = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      const double w = b_profile.norms[i];
      col_sq += v * v * w * w;
    }
    result.max_col_weighted_norm =
        std::max(result.max_col_weighted_norm, std::sqrt(col_sq));
  }
  const double n = static_cast<double>(a.cols());
  const double big_n = static_cast<double>(a.rows());
  const double row_scale = std::sqrt(n * p + std::log(2.0 * big_n));
  const double col_scale = std::sqrt(n * p + std::log(2.0 * n));
  result.implied_k = std::max(result.max_row_norm / row_scale,
                              result.max_col_weighted_norm / col_scale);
  return result;
}

}  // namespace rmlab
