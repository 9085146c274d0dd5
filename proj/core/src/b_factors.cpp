#include "rmlab/b_factors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_detail.hpp"
#include "rmlab/errors.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

namespace {

// Orthonormalizes `count` seeded Gaussian rows in R^dim (modified
// Gram-Schmidt with one re-orthogonalization pass).
std::vector<std::vector<double>> orthonormal_rows(std::size_t count,
                                                  std::size_t dim,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  rows.reserve(count);
  while (rows.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.next_normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : rows) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dot += v[j] * q[j];
        for (std::size_t j = 0; j < dim; ++j) v[j] -= dot * q[j];
      }
    }
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-8) continue;  // degenerate draw, try again
    for (double& x : v) x /= norm;
    rows.push_back(std::move(v));
  }
  return rows;
}

// Column-major slot storage used while realizing a prescribed column-norm
// profile as a chain of plane rotations (Horn's construction: start from a
// diagonal factor with the majorizing spectrum, rotate one column onto its
// exact target norm per step).
class ProfileBuilder {
 public:
  ProfileBuilder(std::size_t effective_rows, std::size_t n_cols)
      : rows_(effective_rows), cols_(n_cols), data_(rows_ * cols_, 0.0) {}

  double* col(std::size_t j) { return data_.data() + j * rows_; }

  double dot(std::size_t a, std::size_t b) const {
    const double* pa = data_.data() + a * rows_;
    const double* pb = data_.data() + b * rows_;
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += pa[i] * pb[i];
    return s;
  }

  // Rotates columns a and b so that column a ends with squared norm target.
  void rotate_to(std::size_t a, std::size_t b, double target) {
    const double saa = dot(a, a);
    const double sbb = dot(b, b);
    const double sab = dot(a, b);
    const double mid = 0.5 * (saa + sbb);
    const double radius = std::hypot(0.5 * (saa - sbb), sab);
    if (radius < 1e-300) return;  // both columns vanish; target must be ~0
    const double cos_arg = std::clamp((target - mid) / radius, -1.0, 1.0);
    const double phi = 0.5 * (std::atan2(sab, 0.5 * (saa - sbb)) +
                              std::acos(cos_arg));
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    double* pa = col(a);
    double* pb = col(b);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double ua = pa[i];
      const double ub = pb[i];
      pa[i] = c * ua + s * ub;
      pb[i] = -s * ua + c * ub;
    }
  }

  std::size_t rows() const { return rows_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix build_diagonal_column_norms(const BFactorSpec& spec) {
  std::vector<double> norms = spec.norms;
  if (norms.empty() && spec.norm_value >= 0.0)
    norms.assign(spec.N, spec.norm_value);
  if (norms.size() != spec.N)
    throw ConfigError("DiagonalColumnNorms: expected " +
                      std::to_string(spec.N) + " column norms, got " +
                      std::to_string(norms.size()));

  double total_sq = 0.0;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (!(norms[j] >= 0.0))
      throw ConfigError("DiagonalColumnNorms: negative norm at column " +
                        std::to_string(j));
    if (norms[j] > 1.0 + 1e-12)
      throw InvariantError(
          "DiagonalColumnNorms: column norm <= operator norm <= 1 violated "
          "at column " + std::to_string(j) + " (" + format_double(norms[j]) +
          ")");
    total_sq += norms[j] * norms[j];
  }
  const double n_cap = static_cast<double>(spec.n);
  if (total_sq > n_cap * (1.0 + 1e-12))
    throw InvariantError(
        "DiagonalColumnNorms: sum of squared column norms <= n violated (" +
        format_double(total_sq) + " > " + std::to_string(spec.n) + ")");

  // With at most n columns each column gets its own row and the profile is
  // realized exactly on the diagonal.
  if (spec.N <= spec.n) {
    return Matrix::from_fn(spec.n, spec.N, [&](std::size_t i, std::size_t j) {
      return i == j ? norms[j] : 0.0;
    });
  }

  // Wide case: start from a diagonal factor whose spectrum (a run of ones
  // plus one remainder) majorizes the squared-norm profile, then walk the
  // targets from largest to smallest, each step rotating an adjacent pair of
  // columns so one lands exactly on its target.
  std::vector<double> targets(spec.N);
  for (std::size_t j = 0; j < spec.N; ++j) targets[j] = norms[j] * norms[j];
  std::vector<std::size_t> order(spec.N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return targets[a] > targets[b];
  });

  // Spectrum capped at n so the factor never needs more than n rows; any
  // feasibility excess beyond fp slack was rejected above.
  const double capped_total = std::min(total_sq, n_cap);
  double ones = std::floor(capped_total);
  double remainder = capped_total - ones;
  if (remainder < 1e-14) remainder = 0.0;
  const std::size_t effective =
      static_cast<std::size_t>(ones) + (remainder > 0.0 ? 1 : 0);

  ProfileBuilder builder(std::max<std::size_t>(effective, 1), spec.N);
  std::vector<double> value(spec.N, 0.0);
  for (std::size_t k = 0; k < effective; ++k) {
    const double ev = k < static_cast<std::size_t>(ones) ? 1.0 : remainder;
    builder.col(k)[k] = std::sqrt(ev);
    value[k] = ev;
  }

  // Active slots sorted by current squared norm, descending.
  std::vector<std::size_t> active(spec.N);
  std::iota(active.begin(), active.end(), 0);
  std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
    return value[a] > value[b];
  });

  std::vector<std::size_t> slot_of(spec.N);
  for (std::size_t step = 0; step < spec.N; ++step) {
    const std::size_t out_col = order[step];
    const double target = targets[out_col];
    if (active.size() == 1) {
      slot_of[out_col] = active[0];
      active.clear();
      break;
    }
    // First active index with value <= target; the pair (pos-1, pos)
    // straddles the target.
    std::size_t pos = active.size();
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (value[active[i]] <= target) {
        pos = i;
        break;
      }
    }
    std::size_t hi, lo;
    if (pos == 0) {
      hi = active[0];
      lo = active[1];
    } else if (pos == active.size()) {
      hi = active[active.size() - 2];
      lo = active[active.size() - 1];
    } else {
      hi = active[pos - 1];
      lo = active[pos];
    }
    const double leftover = value[hi] + value[lo] - target;
    builder.rotate_to(hi, lo, target);
    slot_of[out_col] = hi;
    active.erase(std::remove(active.begin(), active.end(), hi), active.end());
    active.erase(std::remove(active.begin(), active.end(), lo), active.end());
    value[lo] = leftover;
    // Reinsert keeping descending order.
    auto it = active.begin();
    while (it != active.end() && value[*it] > leftover) ++it;
    active.insert(it, lo);
  }

  const std::size_t eff_rows = builder.rows();
  Matrix result =
      Matrix::from_fn(spec.n, spec.N, [&](std::size_t i, std::size_t j) {
        if (i >= eff_rows) return 0.0;
        return builder.col(slot_of[j])[i];
      });
  const auto realized = column_norms(result);
  for (std::size_t j = 0; j < spec.N; ++j) {
    if (std::abs(realized[j] - norms[j]) > 1e-9)
      throw InvariantError(
          "DiagonalColumnNorms: realized column norm drifted from the "
          "prescription at column " + std::to_string(j));
  }
  return result;
}

}  // namespace

Matrix build_b(const BFactorSpec& spec, std::uint64_t seed) {
  if (spec.n == 0 || spec.N == 0)
    throw ConfigError("build_b: dimensions must be positive, got n=" +
                      std::to_string(spec.n) + " N=" + std::to_string(spec.N));
  switch (spec.kind) {
    case BFactorKind::Identity: {
      if (spec.n > spec.N)
        throw DimensionError("build_b: Identity needs n <= N, got " +
                             std::to_string(spec.n) + " > " +
                             std::to_string(spec.N));
      return Matrix::from_fn(spec.n, spec.N, [](std::size_t i, std::size_t j) {
        return i == j ? 1.0 : 0.0;
      });
    }
    case BFactorKind::OrthogonalProjection: {
      if (spec.n > spec.N)
        throw DimensionError("build_b: projection needs n <= N, got " +
                             std::to_string(spec.n) + " > " +
                             std::to_string(spec.N));
      if (spec.rank > spec.n)
        throw ConfigError("build_b: projection rank " +
                          std::to_string(spec.rank) + " exceeds n=" +
                          std::to_string(spec.n));
      const auto rows = orthonormal_rows(spec.rank, spec.N, seed);
      return Matrix::from_fn(spec.n, spec.N, [&](std::size_t i, std::size_t j) {
        return i < rows.size() ? rows[i][j] : 0.0;
      });
    }
    case BFactorKind::RowSelection: {
      if (spec.n > spec.N)
        throw DimensionError("build_b: row selection needs n <= N, got " +
                             std::to_string(spec.n) + " > " +
                             std::to_string(spec.N));
      std::vector<std::size_t> picks = spec.indices;
      if (picks.empty()) {
        // Partial Fisher-Yates over [0, N).
        std::vector<std::size_t> pool(spec.N);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        Rng rng(seed);
        for (std::size_t i = 0; i < spec.n; ++i) {
          const std::size_t j =
              i + static_cast<std::size_t>(rng.next_below(spec.N - i));
          std::swap(pool[i], pool[j]);
        }
        picks.assign(pool.begin(), pool.begin() + spec.n);
        std::sort(picks.begin(), picks.end());
      } else {
        if (picks.size() != spec.n)
          throw ConfigError("build_b: row selection expects n=" +
                            std::to_string(spec.n) + " indices, got " +
                            std::to_string(picks.size()));
        std::vector<std::size_t> sorted = picks;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
          throw ConfigError("build_b: row selection indices must be distinct");
        if (sorted.back() >= spec.N)
          throw ConfigError("build_b: row selection index out of range");
      }
      return Matrix::from_fn(spec.n, spec.N, [&](std::size_t i, std::size_t j) {
        return picks[i] == j ? 1.0 : 0.0;
      });
    }
    case BFactorKind::DiagonalColumnNorms:
      return build_diagonal_column_norms(spec);
    case BFactorKind::ScaledRandomOrthonormalRows: {
      if (spec.n > spec.N)
        throw DimensionError("build_b: orthonormal rows need n <= N, got " +
                             std::to_string(spec.n) + " > " +
                             std::to_string(spec.N));
      if (!(spec.scale > 0.0 && spec.scale <= 1.0))
        throw ConfigError("build_b: scale must lie in (0, 1], got " +
                          format_double(spec.scale));
      const auto rows = orthonormal_rows(spec.n, spec.N, seed);
      return Matrix::from_fn(spec.n, spec.N, [&](std::size_t i, std::size_t j) {
        return spec.scale * rows[i][j];
      });
    }
  }
  throw ConfigError("build_b: unknown kind");
}

ColumnSplit column_split(const Matrix& b, double eps, double c0_eps) {
  if (!(eps > 0.0))
    throw ConfigError("column_split: eps must be positive, got " +
                      format_double(eps));
  if (!(c0_eps > 0.0))
    throw ConfigError("column_split: c0_eps must be positive, got " +
                      format_double(c0_eps));
  const double n = static_cast<double>(b.rows());
  const double exponent = 0.5 + 1.0 / eps;
  const double log2n = std::log(2.0 * n);
  ColumnSplit split;
  split.threshold = c0_eps * std::pow(log2n, -exponent);
  const auto norms = column_norms(b);
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] > split.threshold)
      split.large.push_back(j);
    else
      split.small.push_back(j);
  }
  const double cap =
      n * std::pow(log2n, 2.0 * exponent) / (c0_eps * c0_eps);
  if (static_cast<double>(split.large.size()) > cap * (1.0 + 1e-12))
    throw InvariantError(
        "column_split: |large| <= c0^-2 n log^{2K}(2n) violated; input "
        "factor has squared column mass above n");
  return split;
}

std::string kind_name(BFactorKind k) {
  switch (k) {
    case BFactorKind::Identity: return "Identity";
    case BFactorKind::OrthogonalProjection: return "OrthogonalProjection";
    case BFactorKind::RowSelection: return "RowSelection";
    case BFactorKind::DiagonalColumnNorms: return "DiagonalColumnNorms";
    case BFactorKind::ScaledRandomOrthonormalRows:
      return "ScaledRandomOrthonormalRows";
  }
  return "?";
}

BFactorSpec b_factor_from_json(const std::string& text) {
  return detail::b_factor_from_json_obj(detail::parse_json(text, "b_factor"));
}

std::string b_factor_to_json(const BFactorSpec& spec) {
  return detail::b_factor_to_json_obj(spec).dump();
}

}  // namespace rmlab
