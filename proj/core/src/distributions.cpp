#include "rmlab/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "json_detail.hpp"
#include "rmlab/errors.hpp"

namespace rmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrtPi = std::sqrt(std::numbers::pi);

// E|g|^q for standard normal g.
double gaussian_abs_moment(double q) {
  return std::exp(0.5 * q * std::numbers::ln2 + std::lgamma(0.5 * (q + 1.0))) /
         kSqrtPi;
}

// Marsaglia-Tsang sampler for Gamma(shape, 1), shape >= 1.
double sample_gamma(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

double sample_raw(const EntryDistribution& d, Rng& rng) {
  switch (d.kind) {
    case DistributionKind::Gaussian:
      return rng.next_normal();
    case DistributionKind::Rademacher:
      return (rng.next_u64() & 1) ? 1.0 : -1.0;
    case DistributionKind::SparseSign: {
      const double u = rng.next_unit();
      if (u < 0.5 * d.p) return -1.0;
      if (u < d.p) return 1.0;
      return 0.0;
    }
    case DistributionKind::SymmetricPareto: {
      const double u = 1.0 - rng.next_unit();  // (0, 1]
      const double mag = d.pareto_scale * std::pow(u, -1.0 / d.alpha);
      return (rng.next_u64() & 1) ? mag : -mag;
    }
    case DistributionKind::ScaledStudentT: {
      const double g = rng.next_normal();
      const double chi_sq = 2.0 * sample_gamma(0.5 * d.nu, rng);
      return g * std::sqrt(d.nu / chi_sq);
    }
    case DistributionKind::BoundedUniform:
      return d.half_width * rng.next_symmetric();
  }
  throw ConfigError("sample_raw: unknown distribution kind");
}

}  // namespace

void validate(const EntryDistribution& d) {
  switch (d.kind) {
    case DistributionKind::Gaussian:
    case DistributionKind::Rademacher:
      break;
    case DistributionKind::SparseSign:
      if (!(d.p > 0.0 && d.p <= 1.0))
        throw ConfigError("SparseSign: p must lie in (0, 1], got " +
                          format_double(d.p));
      break;
    case DistributionKind::SymmetricPareto:
      if (!(d.alpha > 2.0))
        throw ConfigError("SymmetricPareto: alpha must exceed 2, got " +
                          format_double(d.alpha));
      if (!(d.pareto_scale > 0.0))
        throw ConfigError("SymmetricPareto: scale must be positive, got " +
                          format_double(d.pareto_scale));
      break;
    case DistributionKind::ScaledStudentT:
      if (!(d.nu > 2.0))
        throw ConfigError("ScaledStudentT: nu must exceed 2, got " +
                          format_double(d.nu));
      break;
    case DistributionKind::BoundedUniform:
      if (!(d.half_width > 0.0))
        throw ConfigError("BoundedUniform: half_width must be positive, got " +
                          format_double(d.half_width));
      break;
  }
  if (!(d.eps >= 0.0))
    throw ConfigError("EntryDistribution: eps must be non-negative, got " +
                      format_double(d.eps));
}

double raw_abs_moment(const EntryDistribution& d, double q) {
  switch (d.kind) {
    case DistributionKind::Gaussian:
      return gaussian_abs_moment(q);
    case DistributionKind::Rademacher:
      return 1.0;
    case DistributionKind::SparseSign:
      return d.p;
    case DistributionKind::SymmetricPareto:
      if (q >= d.alpha) return kInf;
      return d.alpha * std::pow(d.pareto_scale, q) / (d.alpha - q);
    case DistributionKind::ScaledStudentT: {
      if (q >= d.nu) return kInf;
      const double log_m = 0.5 * q * std::log(d.nu) +
                           std::lgamma(0.5 * (q + 1.0)) +
                           std::lgamma(0.5 * (d.nu - q)) -
                           std::lgamma(0.5 * d.nu);
      return std::exp(log_m) / kSqrtPi;
    }
    case DistributionKind::BoundedUniform:
      return std::pow(d.half_width, q) / (q + 1.0);
  }
  throw ConfigError("raw_abs_moment: unknown distribution kind");
}

double normalization_scale(const EntryDistribution& d) {
  validate(d);
  switch (d.normalization) {
    case NormalizationMode::None:
      return 1.0;
    case NormalizationMode::UnitVariance:
      return 1.0 / std::sqrt(raw_abs_moment(d, 2.0));
    case NormalizationMode::Moment4PlusEps: {
      const double q = 4.0 + d.eps;
      const double m = raw_abs_moment(d, q);
      if (!std::isfinite(m))
        throw ConfigError("normalization_scale: the (4+eps)-th moment of " +
                          kind_name(d.kind) +
                          " is infinite; use unit_variance or none");
      return std::pow(m, -1.0 / q);
    }
  }
  throw ConfigError("normalization_scale: unknown normalization mode");
}

MomentProfile theoretical_profile(const EntryDistribution& d) {
  const double s = normalization_scale(d);
  MomentProfile profile;
  profile.eps = d.eps;
  profile.variance = s * s * raw_abs_moment(d, 2.0);
  profile.fourth_moment = std::pow(s, 4.0) * raw_abs_moment(d, 4.0);
  profile.four_plus_eps_moment =
      std::pow(s, 4.0 + d.eps) * raw_abs_moment(d, 4.0 + d.eps);
  switch (d.kind) {
    case DistributionKind::Rademacher:
    case DistributionKind::SparseSign:
      profile.bound = s;
      break;
    case DistributionKind::BoundedUniform:
      profile.bound = s * d.half_width;
      break;
    default:
      profile.bound = kInf;
      break;
  }
  return profile;
}

double sample_entry(const EntryDistribution& d, Rng& rng) {
  return normalization_scale(d) * sample_raw(d, rng);
}

Matrix sample_matrix(const EntryDistribution& d, std::size_t rows,
                     std::size_t cols, std::uint64_t seed) {
  const double s = normalization_scale(d);
  Rng rng(seed);
  return Matrix::from_fn(rows, cols, [&](std::size_t, std::size_t) {
    return s * sample_raw(d, rng);
  });
}

double empirical_moment(const EntryDistribution& d, double order,
                        std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("empirical_moment: trials must be >= 1");
  const double s = normalization_scale(d);
  Rng rng(seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    acc += std::pow(std::abs(s * sample_raw(d, rng)), order);
  }
  return acc / static_cast<double>(trials);
}

std::string kind_name(DistributionKind k) {
  switch (k) {
    case DistributionKind::Gaussian: return "Gaussian";
    case DistributionKind::Rademacher: return "Rademacher";
    case DistributionKind::SparseSign: return "SparseSign";
    case DistributionKind::SymmetricPareto: return "SymmetricPareto";
    case DistributionKind::ScaledStudentT: return "ScaledStudentT";
    case DistributionKind::BoundedUniform: return "BoundedUniform";
  }
  return "?";
}

std::string normalization_name(NormalizationMode m) {
  switch (m) {
    case NormalizationMode::None: return "none";
    case NormalizationMode::UnitVariance: return "unit_variance";
    case NormalizationMode::Moment4PlusEps: return "moment4eps";
  }
  return "?";
}

EntryDistribution distribution_from_json(const std::string& text) {
  return detail::distribution_from_json_obj(
      detail::parse_json(text, "distribution"));
}

std::string distribution_to_json(const EntryDistribution& d) {
  return detail::distribution_to_json_obj(d).dump();
}

}  // namespace rmlab
