#pragma once

#include <cstdint>
#include <string>

#include "rmlab/matrix.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

enum class DistributionKind {
  Gaussian,
  Rademacher,
  SparseSign,
  SymmetricPareto,
  ScaledStudentT,
  BoundedUniform,
};

/// How raw samples are scaled before use. Moment4PlusEps rescales so the
/// (4+eps)-th absolute moment equals 1 (eps = 0 gives plain fourth-moment
/// scaling); UnitVariance rescales to variance 1.
enum class NormalizationMode { None, UnitVariance, Moment4PlusEps };

/// Entry law for random matrix sampling: a raw symmetric mean-zero law plus
/// a normalization mode. Unused parameter fields are ignored by each kind.
struct EntryDistribution {
  DistributionKind kind = DistributionKind::Gaussian;
  NormalizationMode normalization = NormalizationMode::None;
  double p = 0.1;           // SparseSign: P(entry != 0), in (0, 1]
  double alpha = 3.0;       // SymmetricPareto tail exponent, > 2
  double pareto_scale = 1.0;  // SymmetricPareto minimum magnitude x0 > 0
  double nu = 5.0;          // ScaledStudentT degrees of freedom, > 2
  double half_width = 1.0;  // BoundedUniform support [-h, h]
  double eps = 0.5;         // exponent offset for the (4+eps)-th moment
};

/// Scaled moments of an EntryDistribution. Infinite moments are reported as
/// +infinity; bound is sup |sample| (+infinity for unbounded laws).
struct MomentProfile {
  double variance = 0.0;
  double fourth_moment = 0.0;
  double four_plus_eps_moment = 0.0;
  double eps = 0.0;
  double bound = 0.0;
};

/// Validates parameter ranges; throws ConfigError on a bad combination.
void validate(const EntryDistribution& d);

/// E|X_raw|^q of the unscaled law in closed form (+infinity when the moment
/// diverges). q > 0.
double raw_abs_moment(const EntryDistribution& d, double q);

/// The multiplier applied to raw samples under d's normalization mode.
/// Throws ConfigError if the normalizing moment is infinite.
double normalization_scale(const EntryDistribution& d);

/// Closed-form moment profile of the scaled law.
MomentProfile theoretical_profile(const EntryDistribution& d);

/// One scaled sample drawn from rng.
double sample_entry(const EntryDistribution& d, Rng& rng);

/// rows x cols matrix of iid scaled samples, filled in row-major order from
/// Rng(seed). Deterministic in (d, rows, cols, seed).
Matrix sample_matrix(const EntryDistribution& d, std::size_t rows,
                     std::size_t cols, std::uint64_t seed);

/// Monte Carlo estimate of E|X|^order over `trials` draws from Rng(seed).
double empirical_moment(const EntryDistribution& d, double order,
                        std::size_t trials, std::uint64_t seed);

/// JSON round-trip: {"kind": ..., "params": {...}, "normalization": ...}.
/// Unknown kinds or normalizations are rejected with ConfigError.
EntryDistribution distribution_from_json(const std::string& text);
std::string distribution_to_json(const EntryDistribution& d);

std::string kind_name(DistributionKind k);
std::string normalization_name(NormalizationMode m);

}  // namespace rmlab
