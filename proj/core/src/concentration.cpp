#include "rmlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "rmlab/errors.hpp"
#include "rmlab/matrix.hpp"
#include "rmlab/spectral.hpp"

namespace rmlab {

namespace {

double clamp_probability(double v) {
  if (!(v > 0.0)) return 0.0;
  return std::min(v, 1.0);
}

// h(u) = (1 + u) log(1 + u) - u, the Bennett rate function.
double bennett_h(double u) { return (1.0 + u) * std::log1p(u) - u; }

}  // namespace

TailBound::TailBound(std::function<double(double)> fn,
                     std::map<std::string, double> constants,
                     std::string source)
    : fn_(std::move(fn)),
      constants_(std::move(constants)),
      source_(std::move(source)) {
  if (!fn_) throw ConfigError("TailBound requires a callable bound function");
}

double TailBound::operator()(double t) const {
  if (t < 0.0) return 1.0;
  return clamp_probability(fn_(t));
}

TailBound bennett_tail(double sigma_sq) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw ConfigError("bennett_tail: sigma_sq must be positive and finite");
  }
  auto fn = [sigma_sq](double t) {
    return std::exp(-sigma_sq * bennett_h(t / sigma_sq));
  };
  return TailBound(fn, {{"sigma_sq", sigma_sq}}, "bennett");
}

TailBound gaussian_lipschitz_tail(double lipschitz, double c0) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw ConfigError(
        "gaussian_lipschitz_tail: Lipschitz constant must be positive");
  }
  if (!(c0 > 0.0) || !(c0 < 1.0)) {
    throw ConfigError("gaussian_lipschitz_tail: c0 must lie in (0, 1)");
  }
  auto fn = [lipschitz, c0](double t) {
    return std::exp(-c0 * t * t / (lipschitz * lipschitz));
  };
  return TailBound(fn, {{"lipschitz", lipschitz}, {"c0", c0}},
                   "gaussian_lipschitz");
}

TailBound exponential_sum_tail(const std::vector<double>& d, double c0) {
  if (d.empty()) throw ConfigError("exponential_sum_tail: empty coefficients");
  if (!(c0 > 0.0) || !(c0 < 1.0)) {
    throw ConfigError("exponential_sum_tail: c0 must lie in (0, 1)");
  }
  double sum_sq = 0.0;
  double sup = 0.0;
  for (double v : d) {
    if (!std::isfinite(v)) {
      throw ConfigError("exponential_sum_tail: non-finite coefficient");
    }
    sum_sq += v * v;
    sup = std::max(sup, std::fabs(v));
  }
  if (sup == 0.0) {
    throw ConfigError("exponential_sum_tail: all-zero coefficient vector");
  }
  const double center = std::sqrt(sum_sq);
  auto fn = [sup, c0](double t) {
    return std::exp(-c0 * t * t / (sup * sup));
  };
  return TailBound(fn, {{"center", center}, {"sup", sup}, {"c0", c0}},
                   "exponential_sum");
}

TailBound talagrand_tail(double k_bound) {
  if (!(k_bound > 0.0) || !std::isfinite(k_bound)) {
    throw ConfigError("talagrand_tail: scale K must be positive and finite");
  }
  auto fn = [k_bound](double t) {
    const double u = t / k_bound;
    return 4.0 * std::exp(-u * u / 4.0);
  };
  return TailBound(fn, {{"k_bound", k_bound}}, "talagrand");
}

TailBound moments_to_tail(double m_param, double c) {
  if (!(m_param >= 1.0) || !std::isfinite(m_param)) {
    throw ConfigError("moments_to_tail: m must be >= 1");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("moments_to_tail: rate constant c must be positive");
  }
  auto fn = [m_param, c](double t) {
    return 2.0 * m_param * std::exp(-c * t * t);
  };
  return TailBound(fn, {{"m", m_param}, {"c", c}}, "moments_to_tail");
}

double rudelson_bound(const std::vector<std::vector<double>>& u, double p,
                      double big_c) {
  if (u.empty()) throw ConfigError("rudelson_bound: empty vector family");
  if (!(p >= 1.0)) throw ConfigError("rudelson_bound: p must be >= 1");
  if (!(big_c > 0.0)) throw ConfigError("rudelson_bound: C must be positive");
  const std::size_t dim = u.front().size();
  if (dim == 0) throw ConfigError("rudelson_bound: zero-dimensional vectors");
  double max_norm_sq = 0.0;
  for (const auto& v : u) {
    if (v.size() != dim) {
      throw DimensionError("rudelson_bound: mixed vector dimensions");
    }
    double s = 0.0;
    for (double x : v) s += x * x;
    max_norm_sq = std::max(max_norm_sq, s);
  }
  // || sum_i u_i (x) u_i || = ||U||^2 for the dim x count matrix U whose
  // columns are the u_i, so one spectral norm of U gives the tensor sum norm.
  Matrix stacked = Matrix::from_fn(
      dim, u.size(), [&u](std::size_t i, std::size_t j) { return u[j][i]; });
  const double tensor_norm = spectral_norm(stacked).value;  // already ||U||
  const double m_dim = static_cast<double>(dim);
  return big_c * (std::sqrt(p) + std::sqrt(std::log(m_dim))) *
         std::sqrt(max_norm_sq) * tensor_norm;
}

TruncationCheck truncation_bound(const std::vector<double>& samples,
                                 double m_cut, double p) {
  if (samples.empty()) throw ConfigError("truncation_bound: empty samples");
  if (!(m_cut > 0.0)) throw ConfigError("truncation_bound: M must be > 0");
  if (!(p >= 1.0)) throw ConfigError("truncation_bound: p must be >= 1");
  double lhs = 0.0;
  double moment = 0.0;
  for (double x : samples) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ConfigError("truncation_bound: samples must be non-negative");
    }
    if (x >= m_cut) lhs += x;
    moment += std::pow(x, p);
  }
  const double count = static_cast<double>(samples.size());
  TruncationCheck check;
  check.lhs = lhs / count;
  check.rhs = (moment / count) / std::pow(m_cut, p - 1.0);
  check.holds = check.lhs <= check.rhs * (1.0 + 1e-12);
  return check;
}

EmpiricalTail::EmpiricalTail(std::vector<double> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) throw ConfigError("EmpiricalTail: empty sample set");
  for (double x : samples_) {
    if (!std::isfinite(x)) throw ConfigError("EmpiricalTail: non-finite sample");
  }
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalTail::exceedance(double t) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t);
  const auto above = static_cast<double>(samples_.end() - it);
  return above / static_cast<double>(samples_.size());
}

std::vector<DominationRow> domination_audit(
    const TailBound& bound, const EmpiricalTail& tail,
    const std::vector<double>& thresholds) {
  if (thresholds.empty()) {
    throw ConfigError("domination_audit: no thresholds given");
  }
  std::vector<DominationRow> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) {
    DominationRow row;
    row.t = t;
    row.bound = bound(t);
    row.empirical = tail.exceedance(t);
    row.trials = tail.count();
    const double slack =
        3.0 * std::sqrt(row.bound / static_cast<double>(row.trials));
    row.dominated = row.empirical <= row.bound + slack;
    rows.push_back(row);
  }
  return rows;
}

void write_tail_csv(std::ostream& out, const std::vector<DominationRow>& rows) {
  out << "t,bound,empirical,trials\n";
  for (const auto& row : rows) {
    out << format_double(row.t) << ',' << format_double(row.bound) << ','
        << format_double(row.empirical) << ',' << row.trials << '\n';
  }
}

}  // namespace rmlab
