#include "rmlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json_detail.hpp"
#include "rmlab/concentration.hpp"
#include "rmlab/errors.hpp"
#include "rmlab/matrix.hpp"
#include "rmlab/rng.hpp"
#include "rmlab/spectral.hpp"

namespace rmlab {

namespace {

// Seed stream tags. Trial streams must depend only on (base_seed, global
// trial index) so reports are reproducible for any thread count; factor and
// family streams depend on the dims index so every grid group over the same
// dims sees the same deterministic inputs.
constexpr std::uint64_t kTrialStream = 1;
constexpr std::uint64_t kFactorStream = 2;
constexpr std::uint64_t kFamilyStream = 3;
constexpr std::uint64_t kNormSeedTag = 7;

double get_param(const ExperimentConfig& cfg, const std::string& key,
                 double fallback) {
  auto it = cfg.params.find(key);
  return it == cfg.params.end() ? fallback : it->second;
}

std::string get_string_param(const ExperimentConfig& cfg,
                             const std::string& key,
                             const std::string& fallback) {
  auto it = cfg.string_params.find(key);
  return it == cfg.string_params.end() ? fallback : it->second;
}

// Per (dims, grid) group of trials: the shared deterministic inputs.
struct GroupCtx {
  DimTriple dims;
  std::size_t dims_index = 0;
  std::size_t grid_index = 0;
  double p = 0.0;  // sparse grid value, 0 when unused
  EntryDistribution dist;
  std::shared_ptr<const Matrix> b;
  double b_norm = 0.0;
  double b_hs = 0.0;
  std::vector<std::vector<double>> family;
  double normalizer = 0.0;
};

struct Job {
  std::size_t slot = 0;
  std::size_t group = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
};

// Power sums of y_j = ||column j||^2 for the variance audit, accumulated per
// trial and pooled sequentially afterwards.
struct ColumnPowerSums {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double s4 = 0.0;
  double count = 0.0;
};

bool uses_b(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Smin:
    case ExperimentKind::RudelsonAudit:
      return false;
    default:
      return true;
  }
}

bool requires_square_product(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::LogBound:
    case ExperimentKind::SmallColumns:
    case ExperimentKind::SparseNorm:
      return true;
    default:
      return false;
  }
}

// Unknown keys are rejected rather than ignored: a misspelled "ceiling" or a
// p_grid handed to the wrong experiment would otherwise silently fall back
// to defaults. The sets are type-aware because the three param maps route by
// JSON value type.
void validate_param_keys(const ExperimentConfig& cfg) {
  std::vector<std::string> number_keys{"ceiling", "fit_quantile", "tol",
                                       "max_iter"};
  std::vector<std::string> string_keys;
  std::vector<std::string> array_keys;
  switch (cfg.experiment) {
    case ExperimentKind::SmallColumns:
      number_keys.push_back("M");
      number_keys.push_back("eps");
      break;
    case ExperimentKind::SparseNorm:
      array_keys.push_back("p_grid");
      break;
    case ExperimentKind::RudelsonAudit:
      number_keys.push_back("p_moment");
      number_keys.push_back("sign_draws");
      number_keys.push_back("family_size");
      string_keys.push_back("family");
      break;
    case ExperimentKind::Smin:
      number_keys.push_back("smin_t");
      break;
    default:
      break;
  }
  const auto contains = [](const std::vector<std::string>& keys,
                           const std::string& key) {
    return std::find(keys.begin(), keys.end(), key) != keys.end();
  };
  const std::string name = experiment_name(cfg.experiment);
  for (const auto& [key, value] : cfg.params) {
    if (!contains(number_keys, key)) {
      throw ConfigError("experiment: unrecognized numeric param '" + key +
                        "' for " + name);
    }
  }
  for (const auto& [key, value] : cfg.string_params) {
    if (!contains(string_keys, key)) {
      throw ConfigError("experiment: unrecognized string param '" + key +
                        "' for " + name);
    }
  }
  for (const auto& [key, value] : cfg.array_params) {
    if (!contains(array_keys, key)) {
      throw ConfigError("experiment: unrecognized array param '" + key +
                        "' for " + name);
    }
  }
}

void validate_common(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("experiment: trials must be >= 1");
  validate_param_keys(cfg);
  if (cfg.dims.empty()) throw ConfigError("experiment: dims must be non-empty");
  for (const auto& d : cfg.dims) {
    if (d.m < 1 || d.n < 1 || d.N < 1) {
      throw ConfigError("experiment: all dims components must be >= 1");
    }
    if (requires_square_product(cfg.experiment) && d.m != d.n) {
      throw ConfigError("experiment: " + experiment_name(cfg.experiment) +
                        " is stated for a square product and needs m == n");
    }
    if (cfg.experiment == ExperimentKind::Smin && d.m < d.n) {
      throw ConfigError("smin: needs m >= n (tall sample matrix)");
    }
  }
  const double quantile = get_param(cfg, "fit_quantile", 1.0);
  if (!(quantile > 0.0) || !(quantile <= 1.0)) {
    throw ConfigError("experiment: fit_quantile must lie in (0, 1]");
  }
  const double tol = get_param(cfg, "tol", 1e-10);
  if (!(tol > 0.0)) throw ConfigError("experiment: tol must be positive");
  const double max_iter = get_param(cfg, "max_iter", 10000.0);
  if (!(max_iter >= 1.0)) throw ConfigError("experiment: max_iter must be >= 1");
  validate(cfg.distribution);
}

void validate_moments(const ExperimentConfig& cfg,
                      const MomentProfile& profile) {
  switch (cfg.experiment) {
    case ExperimentKind::MainBound:
      if (!std::isfinite(profile.four_plus_eps_moment)) {
        throw ConfigError(
            "main_bound: entry law has infinite (4+eps)-th moment; heavy "
            "tails belong to run_sharpness");
      }
      break;
    case ExperimentKind::LogBound:
      if (!(profile.fourth_moment <= 1.0 + 1e-9)) {
        throw ConfigError(
            "log_bound: entry fourth moment must be normalized to at most 1");
      }
      break;
    case ExperimentKind::VarianceAudit:
      if (!(profile.fourth_moment <= 1.0 + 1e-9)) {
        throw ConfigError(
            "variance_audit: entry fourth moment must be normalized to at "
            "most 1");
      }
      break;
    case ExperimentKind::Sharpness:
      if (std::isfinite(profile.fourth_moment)) {
        throw ConfigError(
            "sharpness: entry law has finite fourth moment; use "
            "run_main_bound as the control");
      }
      break;
    case ExperimentKind::SparseNorm:
      if (cfg.distribution.kind != DistributionKind::SparseSign) {
        throw ConfigError("sparse_norm: distribution must be SparseSign");
      }
      if (cfg.distribution.normalization != NormalizationMode::None) {
        throw ConfigError(
            "sparse_norm: normalization must be 'none' so entries satisfy "
            "|a_ij| <= 1");
      }
      break;
    case ExperimentKind::Smin:
      if (cfg.distribution.normalization != NormalizationMode::UnitVariance) {
        throw ConfigError("smin: distribution must use unit_variance");
      }
      break;
    case ExperimentKind::SmallColumns:
      if (cfg.b_factor.kind != BFactorKind::DiagonalColumnNorms) {
        throw ConfigError(
            "small_columns: b_factor must be DiagonalColumnNorms");
      }
      break;
    case ExperimentKind::RudelsonAudit:
      break;
  }
}

std::vector<double> grid_values(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::SparseNorm) return {0.0};
  auto it = cfg.array_params.find("p_grid");
  std::vector<double> grid =
      it != cfg.array_params.end() ? it->second
                                   : std::vector<double>{cfg.distribution.p};
  if (grid.empty()) throw ConfigError("sparse_norm: empty p_grid");
  for (double p : grid) {
    if (!(p > 0.0) || !(p <= 1.0)) {
      throw ConfigError("sparse_norm: grid p must lie in (0, 1]");
    }
  }
  return grid;
}

double group_normalizer(const ExperimentConfig& cfg, const GroupCtx& g) {
  const double m = static_cast<double>(g.dims.m);
  const double n = static_cast<double>(g.dims.n);
  const double big_n = static_cast<double>(g.dims.N);
  switch (cfg.experiment) {
    case ExperimentKind::MainBound:
    case ExperimentKind::Sharpness:
      return std::sqrt(n) + std::sqrt(m);
    case ExperimentKind::LogBound:
      return std::sqrt(n * std::log(2.0 * n));
    case ExperimentKind::SmallColumns: {
      const double m_scale = get_param(cfg, "M", 1.0);
      return std::sqrt(m_scale * n);
    }
    case ExperimentKind::SparseNorm: {
      const double factor = std::pow(std::log(std::exp(1.0) / g.p), 1.5);
      return factor * std::sqrt(n * g.p + std::log(2.0 * big_n));
    }
    case ExperimentKind::Smin:
      return std::sqrt(m) - std::sqrt(n - 1.0);
    case ExperimentKind::RudelsonAudit:
      return 0.0;  // set from the family after it is built
    case ExperimentKind::VarianceAudit:
      return n;
  }
  throw ConfigError("experiment: unknown kind");
}

std::vector<std::vector<double>> build_family(const ExperimentConfig& cfg,
                                              const DimTriple& dims,
                                              std::uint64_t family_seed) {
  const std::size_t m = dims.m;
  const std::string family = get_string_param(cfg, "family", "orthonormal");
  const auto size_param = get_param(
      cfg, "family_size", static_cast<double>(m));
  if (!(size_param >= 1.0)) {
    throw ConfigError("rudelson_audit: family_size must be >= 1");
  }
  const auto count = static_cast<std::size_t>(size_param);
  std::vector<std::vector<double>> vectors;
  vectors.reserve(count);
  if (family == "orthonormal") {
    if (count > m) {
      throw ConfigError(
          "rudelson_audit: an orthonormal family in dimension m has at most "
          "m vectors");
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> e(m, 0.0);
      e[i] = 1.0;
      vectors.push_back(std::move(e));
    }
  } else if (family == "gaussian") {
    Rng rng(family_seed);
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> v(m);
      for (double& x : v) x = rng.next_normal();
      vectors.push_back(std::move(v));
    }
  } else {
    throw ConfigError("rudelson_audit: unknown family '" + family +
                      "' (expected orthonormal or gaussian)");
  }
  return vectors;
}

void check_small_column_hypothesis(const ExperimentConfig& cfg,
                                   const Matrix& b, const DimTriple& dims) {
  const double m_scale = get_param(cfg, "M", 1.0);
  if (!(m_scale >= 1.0)) throw ConfigError("small_columns: M must be >= 1");
  const double eps = get_param(cfg, "eps", cfg.distribution.eps);
  if (!(eps > 0.0)) throw ConfigError("small_columns: eps must be positive");
  const double n = static_cast<double>(dims.n);
  const double threshold =
      m_scale * std::pow(std::log(2.0 * n), -(0.5 + 1.0 / eps));
  const std::vector<double> norms = column_norms(b);
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] > threshold * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "small_columns: column " << j << " has norm " << norms[j]
          << ", above the hypothesis threshold " << threshold;
      throw ConfigError(msg.str());
    }
  }
}

// || sum_i eps_i u_i (x) u_i || for one sign draw; the Gram accumulation
// skips zero coordinates so orthonormal basis families cost O(m).
double signed_tensor_sum_norm(const std::vector<std::vector<double>>& family,
                              const std::vector<double>& signs,
                              std::vector<double>& scratch, double tol,
                              int max_iter, std::uint64_t norm_seed) {
  const std::size_t m = family.front().size();
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (std::size_t f = 0; f < family.size(); ++f) {
    const auto& u = family[f];
    const double sign = signs[f];
    for (std::size_t i = 0; i < m; ++i) {
      const double ui = u[i];
      if (ui == 0.0) continue;
      const double scaled = sign * ui;
      double* row = scratch.data() + i * m;
      for (std::size_t k = 0; k < m; ++k) row[k] += scaled * u[k];
    }
  }
  Matrix s(m, m, scratch);
  return spectral_norm(s, tol, max_iter, norm_seed).value;
}

std::string group_prefix(const GroupCtx& g) {
  return "g" + std::to_string(g.dims_index) + "_" +
         std::to_string(g.grid_index) + "_";
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return (k % 2 == 1) ? values[k / 2]
                      : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

}  // namespace

double fit_constant(std::vector<double> ratios, double quantile) {
  if (ratios.empty()) throw ConfigError("fit_constant: no ratios");
  if (!(quantile > 0.0) || !(quantile <= 1.0)) {
    throw ConfigError("fit_constant: quantile must lie in (0, 1]");
  }
  std::sort(ratios.begin(), ratios.end());
  const double k = static_cast<double>(ratios.size());
  auto rank = static_cast<std::size_t>(std::ceil(quantile * k));
  rank = std::min(std::max<std::size_t>(rank, 1), ratios.size());
  return ratios[rank - 1];
}

double fit_constant(const std::vector<TrialRecord>& records, double quantile) {
  std::vector<double> ratios;
  ratios.reserve(records.size());
  for (const auto& r : records) ratios.push_back(r.ratio);
  return fit_constant(std::move(ratios), quantile);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  validate_common(cfg);
  const MomentProfile profile = theoretical_profile(cfg.distribution);
  validate_moments(cfg, profile);

  const ExperimentKind kind = cfg.experiment;
  const std::string name = experiment_name(kind);
  const double tol = get_param(cfg, "tol", 1e-10);
  const auto max_iter = static_cast<int>(get_param(cfg, "max_iter", 10000.0));
  const double p_moment = get_param(cfg, "p_moment", 2.0);
  const auto sign_draws =
      static_cast<std::size_t>(get_param(cfg, "sign_draws", 100.0));
  if (kind == ExperimentKind::RudelsonAudit) {
    if (!(p_moment >= 1.0)) {
      throw ConfigError("rudelson_audit: p_moment must be >= 1");
    }
    if (sign_draws < 1) {
      throw ConfigError("rudelson_audit: sign_draws must be >= 1");
    }
  }

  const std::uint64_t trial_stream = mix_seed(cfg.base_seed, kTrialStream);
  const std::uint64_t factor_stream = mix_seed(cfg.base_seed, kFactorStream);
  const std::uint64_t family_stream = mix_seed(cfg.base_seed, kFamilyStream);

  const std::vector<double> grid = grid_values(cfg);

  // Build groups; B and the vector family depend only on the dims index so
  // grid groups over the same dims share them.
  std::vector<GroupCtx> groups;
  std::shared_ptr<const Matrix> cached_b;
  double cached_b_norm = 0.0;
  double cached_b_hs = 0.0;
  for (std::size_t di = 0; di < cfg.dims.size(); ++di) {
    const DimTriple dims = cfg.dims[di];
    cached_b.reset();
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      GroupCtx g;
      g.dims = dims;
      g.dims_index = di;
      g.grid_index = gi;
      g.dist = cfg.distribution;
      if (kind == ExperimentKind::SparseNorm) {
        g.p = grid[gi];
        g.dist.p = g.p;
        validate(g.dist);
      }
      if (uses_b(kind)) {
        if (!cached_b) {
          BFactorSpec spec = cfg.b_factor;
          spec.n = dims.m;  // B has m rows so that W = BA is m x n
          spec.N = dims.N;
          Matrix built = build_b(spec, mix_seed(factor_stream, di));
          if (kind == ExperimentKind::SmallColumns) {
            check_small_column_hypothesis(cfg, built, dims);
          }
          cached_b = std::make_shared<const Matrix>(std::move(built));
          cached_b_norm = spectral_norm(*cached_b, tol, max_iter).value;
          cached_b_hs = hilbert_schmidt_norm(*cached_b);
        }
        g.b = cached_b;
        g.b_norm = cached_b_norm;
        g.b_hs = cached_b_hs;
      }
      if (kind == ExperimentKind::RudelsonAudit) {
        g.family = build_family(cfg, dims, mix_seed(family_stream, di));
        g.normalizer = rudelson_bound(g.family, p_moment, 1.0);
      } else {
        g.normalizer = group_normalizer(cfg, g);
      }
      if (!(g.normalizer > 0.0)) {
        throw InvariantError("experiment: normalizer must be positive");
      }
      groups.push_back(std::move(g));
    }
  }

  // One job per trial; the global slot index both orders the records and
  // derives the trial seed.
  std::vector<Job> jobs;
  jobs.reserve(groups.size() * cfg.trials);
  for (std::size_t group = 0; group < groups.size(); ++group) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      Job job;
      job.slot = jobs.size();
      job.group = group;
      job.trial = t;
      job.seed = mix_seed(trial_stream, job.slot);
      jobs.push_back(job);
    }
  }

  std::vector<TrialRecord> records(jobs.size());
  std::vector<ColumnPowerSums> column_sums(
      kind == ExperimentKind::VarianceAudit ? jobs.size() : 0);

  auto run_job = [&](const Job& job) {
    const GroupCtx& g = groups[job.group];
    const DimTriple dims = g.dims;
    double measured = 0.0;
    switch (kind) {
      case ExperimentKind::Smin: {
        Matrix a = sample_matrix(g.dist, dims.m, dims.n, job.seed);
        measured = smallest_singular_value(a);
        break;
      }
      case ExperimentKind::RudelsonAudit: {
        Rng rng(job.seed);
        std::vector<double> signs(g.family.size());
        std::vector<double> scratch(dims.m * dims.m);
        double acc = 0.0;
        for (std::size_t d = 0; d < sign_draws; ++d) {
          for (double& s : signs) s = (rng.next_u64() & 1u) ? 1.0 : -1.0;
          const double value = signed_tensor_sum_norm(
              g.family, signs, scratch, tol, max_iter,
              mix_seed(job.seed, kNormSeedTag));
          acc += std::pow(value, p_moment);
        }
        measured = std::pow(acc / static_cast<double>(sign_draws),
                            1.0 / p_moment);
        break;
      }
      case ExperimentKind::VarianceAudit: {
        Matrix a = sample_matrix(g.dist, dims.N, dims.n, job.seed);
        Matrix w = multiply(*g.b, a);
        ColumnPowerSums sums;
        double max_sq = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) {
          double sq = 0.0;
          for (std::size_t i = 0; i < w.rows(); ++i) {
            const double v = w(i, j);
            sq += v * v;
          }
          max_sq = std::max(max_sq, sq);
          sums.s1 += sq;
          sums.s2 += sq * sq;
          sums.s3 += sq * sq * sq;
          sums.s4 += sq * sq * sq * sq;
        }
        sums.count = static_cast<double>(w.cols());
        column_sums[job.slot] = sums;
        measured = max_sq;
        break;
      }
      default: {
        Matrix a = sample_matrix(g.dist, dims.N, dims.n, job.seed);
        Matrix w = multiply(*g.b, a);
        measured = spectral_norm(w, tol, max_iter,
                                 mix_seed(job.seed, kNormSeedTag))
                       .value;
        break;
      }
    }
    TrialRecord record;
    record.experiment = name;
    record.m = dims.m;
    record.n = dims.n;
    record.N = dims.N;
    record.trial = job.trial;
    record.seed = job.seed;
    record.measured = measured;
    record.normalizer = g.normalizer;
    record.ratio = measured / g.normalizer;
    records[job.slot] = std::move(record);
  };

  const unsigned workers = std::max(
      1u, static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size())));
  if (workers == 1) {
    for (const Job& job : jobs) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) break;
            run_job(jobs[idx]);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  // Sequential reduction keeps aggregates byte-identical across thread
  // counts.
  ExperimentReport report;
  report.records = std::move(records);
  const double quantile = get_param(cfg, "fit_quantile", 1.0);
  report.fitted_constant = fit_constant(report.records, quantile);
  report.aggregates["fitted"] = report.fitted_constant;

  std::vector<double> all_ratios;
  all_ratios.reserve(report.records.size());
  double ratio_sum = 0.0;
  for (const auto& r : report.records) {
    all_ratios.push_back(r.ratio);
    ratio_sum += r.ratio;
  }
  report.aggregates["median"] = median_of(all_ratios);
  report.aggregates["mean"] =
      ratio_sum / static_cast<double>(report.records.size());

  std::vector<double> group_fits;
  for (std::size_t group = 0; group < groups.size(); ++group) {
    const GroupCtx& g = groups[group];
    const std::string prefix = group_prefix(g);
    const std::size_t begin = group * cfg.trials;
    std::vector<double> ratios;
    ratios.reserve(cfg.trials);
    double sum = 0.0;
    double max_measured = 0.0;
    double moment_acc = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const TrialRecord& r = report.records[begin + t];
      ratios.push_back(r.ratio);
      sum += r.ratio;
      max_measured = std::max(max_measured, r.measured);
      if (kind == ExperimentKind::RudelsonAudit) {
        moment_acc += std::pow(r.measured, p_moment);
      }
    }
    const double fitted = fit_constant(ratios, quantile);
    group_fits.push_back(fitted);
    report.aggregates[prefix + "fitted"] = fitted;
    report.aggregates[prefix + "median"] = median_of(ratios);
    report.aggregates[prefix + "mean"] =
        sum / static_cast<double>(cfg.trials);

    switch (kind) {
      case ExperimentKind::MainBound: {
        const double denom =
            g.b_norm * std::sqrt(static_cast<double>(g.dims.n)) + g.b_hs;
        report.aggregates[prefix + "b_norm"] = g.b_norm;
        report.aggregates[prefix + "b_hs"] = g.b_hs;
        if (denom > 0.0) {
          report.aggregates[prefix + "fitted_eq_b"] = max_measured / denom;
        }
        break;
      }
      case ExperimentKind::SparseNorm:
        report.aggregates[prefix + "p"] = g.p;
        break;
      case ExperimentKind::RudelsonAudit: {
        const double pooled = std::pow(
            moment_acc / static_cast<double>(cfg.trials), 1.0 / p_moment);
        report.aggregates[prefix + "pooled"] = pooled / g.normalizer;
        report.aggregates[prefix + "rhs_unit"] = g.normalizer;
        break;
      }
      case ExperimentKind::VarianceAudit: {
        ColumnPowerSums pooled;
        double max_sum = 0.0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          const ColumnPowerSums& s = column_sums[begin + t];
          pooled.s1 += s.s1;
          pooled.s2 += s.s2;
          pooled.s3 += s.s3;
          pooled.s4 += s.s4;
          pooled.count += s.count;
          max_sum += report.records[begin + t].measured;
        }
        const double k = pooled.count;
        const double m1 = pooled.s1 / k;
        const double m2 = pooled.s2 / k;
        const double m3 = pooled.s3 / k;
        const double m4 = pooled.s4 / k;
        const double variance = std::max(0.0, m2 - m1 * m1);
        // Central fourth moment from raw moments, for the standard error of
        // the variance estimate.
        const double mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 -
                           3.0 * m1 * m1 * m1 * m1;
        const double var_of_var =
            std::max(0.0, (mu4 - variance * variance) / k);
        report.aggregates[prefix + "mean_norm_sq"] = m1;
        report.aggregates[prefix + "se_mean"] = std::sqrt(variance / k);
        report.aggregates[prefix + "var_norm_sq"] = variance;
        report.aggregates[prefix + "se_var"] = std::sqrt(var_of_var);
        report.aggregates[prefix + "mean_max"] =
            max_sum / static_cast<double>(cfg.trials);
        const double n = static_cast<double>(g.dims.n);
        report.aggregates[prefix + "mean_norm_sq_over_n"] = m1 / n;
        report.aggregates[prefix + "var_over_3n"] = variance / (3.0 * n);
        report.aggregates[prefix + "mean_max_over_n"] =
            (max_sum / static_cast<double>(cfg.trials)) / n;
        break;
      }
      default:
        break;
    }
  }

  if (kind == ExperimentKind::Smin) {
    report.aggregates["q05"] = fit_constant(all_ratios, 0.05);
    report.aggregates["q10"] = fit_constant(all_ratios, 0.10);
    report.aggregates["q25"] = fit_constant(all_ratios, 0.25);
    report.aggregates["q50"] = fit_constant(all_ratios, 0.50);
    const double t_threshold = get_param(cfg, "smin_t", 0.1);
    std::size_t below = 0;
    for (double r : all_ratios) {
      if (r <= t_threshold) ++below;
    }
    report.aggregates["t_threshold"] = t_threshold;
    report.aggregates["frac_le_t"] =
        static_cast<double>(below) / static_cast<double>(all_ratios.size());
  }
  if (kind == ExperimentKind::RudelsonAudit && group_fits.size() > 1) {
    const double lo = *std::min_element(group_fits.begin(), group_fits.end());
    const double hi = *std::max_element(group_fits.begin(), group_fits.end());
    if (lo > 0.0) report.aggregates["stability_ratio"] = hi / lo;
  }

  auto ceiling_it = cfg.params.find("ceiling");
  if (ceiling_it != cfg.params.end()) {
    report.pass = report.fitted_constant <= ceiling_it->second;
    report.aggregates["ceiling"] = ceiling_it->second;
  }
  return report;
}

namespace {

ExperimentReport run_checked(const ExperimentConfig& cfg, unsigned threads,
                             ExperimentKind expected) {
  if (cfg.experiment != expected) {
    throw ConfigError("experiment: config names " +
                      experiment_name(cfg.experiment) + " but " +
                      experiment_name(expected) + " was invoked");
  }
  return run_experiment(cfg, threads);
}

}  // namespace

ExperimentReport run_main_bound(const ExperimentConfig& cfg, unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::MainBound);
}
ExperimentReport run_log_bound(const ExperimentConfig& cfg, unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::LogBound);
}
ExperimentReport run_small_columns(const ExperimentConfig& cfg,
                                   unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::SmallColumns);
}
ExperimentReport run_sparse_norm(const ExperimentConfig& cfg,
                                 unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::SparseNorm);
}
ExperimentReport run_smin(const ExperimentConfig& cfg, unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::Smin);
}
ExperimentReport run_sharpness(const ExperimentConfig& cfg, unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::Sharpness);
}
ExperimentReport run_rudelson_audit(const ExperimentConfig& cfg,
                                    unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::RudelsonAudit);
}
ExperimentReport run_variance_audit(const ExperimentConfig& cfg,
                                    unsigned threads) {
  return run_checked(cfg, threads, ExperimentKind::VarianceAudit);
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "experiment,m,n,N,trial,seed,measured,normalizer,ratio\n";
  for (const auto& r : report.records) {
    out << r.experiment << ',' << r.m << ',' << r.n << ',' << r.N << ','
        << r.trial << ',' << r.seed << ',' << format_double(r.measured) << ','
        << format_double(r.normalizer) << ',' << format_double(r.ratio)
        << '\n';
  }
}

std::vector<TrialRecord> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "experiment,m,n,N,trial,seed,measured,normalizer,ratio") {
    throw ConfigError("report CSV: missing or unexpected header");
  }
  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw ConfigError("report CSV: line " + std::to_string(line_no) +
                        " has " + std::to_string(fields.size()) +
                        " fields, expected 9");
    }
    try {
      TrialRecord r;
      r.experiment = fields[0];
      r.m = std::stoull(fields[1]);
      r.n = std::stoull(fields[2]);
      r.N = std::stoull(fields[3]);
      r.trial = std::stoull(fields[4]);
      r.seed = std::stoull(fields[5]);
      r.measured = std::stod(fields[6]);
      r.normalizer = std::stod(fields[7]);
      r.ratio = std::stod(fields[8]);
      records.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ConfigError("report CSV: malformed value on line " +
                        std::to_string(line_no));
    }
  }
  return records;
}

ExperimentConfig config_from_json(const std::string& text) {
  const nlohmann::json j = detail::parse_json(text, "experiment config");
  const char* what = "experiment config";
  ExperimentConfig cfg;

  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    throw ConfigError(std::string(what) + ": missing string field 'experiment'");
  }
  cfg.experiment = experiment_kind_from_name(j["experiment"].get<std::string>());

  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty()) {
    throw ConfigError(std::string(what) + ": 'dims' must be a non-empty array");
  }
  for (const auto& entry : j["dims"]) {
    if (!entry.is_array() || entry.size() != 3) {
      throw ConfigError(std::string(what) +
                        ": each dims entry must be an [m, n, N] array");
    }
    DimTriple t;
    const nlohmann::json parts[3] = {entry[0], entry[1], entry[2]};
    std::size_t values[3];
    for (int i = 0; i < 3; ++i) {
      if (!parts[i].is_number_integer() || parts[i].get<long long>() < 1) {
        throw ConfigError(std::string(what) +
                          ": dims components must be positive integers");
      }
      values[i] = parts[i].get<std::size_t>();
    }
    t.m = values[0];
    t.n = values[1];
    t.N = values[2];
    cfg.dims.push_back(t);
  }

  if (!j.contains("distribution")) {
    throw ConfigError(std::string(what) + ": missing 'distribution'");
  }
  cfg.distribution = detail::distribution_from_json_obj(j["distribution"]);

  if (j.contains("b_factor")) {
    cfg.b_factor = detail::b_factor_from_json_obj(j["b_factor"]);
  }

  if (!j.contains("trials") || !j["trials"].is_number_integer() ||
      j["trials"].get<long long>() < 1) {
    throw ConfigError(std::string(what) +
                      ": 'trials' must be a positive integer");
  }
  cfg.trials = j["trials"].get<std::size_t>();

  if (j.contains("base_seed")) {
    if (!j["base_seed"].is_number_integer() ||
        j["base_seed"].get<long long>() < 0) {
      throw ConfigError(std::string(what) +
                        ": 'base_seed' must be a non-negative integer");
    }
    cfg.base_seed = j["base_seed"].get<std::uint64_t>();
  }

  if (j.contains("params")) {
    const auto& params = j["params"];
    if (!params.is_object()) {
      throw ConfigError(std::string(what) + ": 'params' must be an object");
    }
    for (auto it = params.begin(); it != params.end(); ++it) {
      const auto& value = it.value();
      if (value.is_number()) {
        cfg.params[it.key()] = value.get<double>();
      } else if (value.is_string()) {
        cfg.string_params[it.key()] = value.get<std::string>();
      } else if (value.is_array()) {
        std::vector<double> numbers;
        for (const auto& x : value) {
          if (!x.is_number()) {
            throw ConfigError(std::string(what) + ": param '" + it.key() +
                              "' array must hold numbers");
          }
          numbers.push_back(x.get<double>());
        }
        cfg.array_params[it.key()] = std::move(numbers);
      } else {
        throw ConfigError(std::string(what) + ": param '" + it.key() +
                          "' must be a number, string, or number array");
      }
    }
  }

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "experiment" && key != "dims" && key != "distribution" &&
        key != "b_factor" && key != "trials" && key != "base_seed" &&
        key != "params") {
      throw ConfigError(std::string(what) + ": unknown field '" + key + "'");
    }
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = experiment_name(cfg.experiment);
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : cfg.dims) {
    dims.push_back(nlohmann::json::array({d.m, d.n, d.N}));
  }
  j["dims"] = dims;
  j["distribution"] = detail::distribution_to_json_obj(cfg.distribution);
  j["b_factor"] = detail::b_factor_to_json_obj(cfg.b_factor);
  j["trials"] = cfg.trials;
  j["base_seed"] = cfg.base_seed;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : cfg.params) params[key] = value;
  for (const auto& [key, value] : cfg.string_params) params[key] = value;
  for (const auto& [key, value] : cfg.array_params) params[key] = value;
  j["params"] = params;
  return j.dump(2);
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::MainBound: return "main_bound";
    case ExperimentKind::LogBound: return "log_bound";
    case ExperimentKind::SmallColumns: return "small_columns";
    case ExperimentKind::SparseNorm: return "sparse_norm";
    case ExperimentKind::Smin: return "smin";
    case ExperimentKind::Sharpness: return "sharpness";
    case ExperimentKind::RudelsonAudit: return "rudelson_audit";
    case ExperimentKind::VarianceAudit: return "variance_audit";
  }
  return "?";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
  if (name == "main_bound") return ExperimentKind::MainBound;
  if (name == "log_bound") return ExperimentKind::LogBound;
  if (name == "small_columns") return ExperimentKind::SmallColumns;
  if (name == "sparse_norm") return ExperimentKind::SparseNorm;
  if (name == "smin") return ExperimentKind::Smin;
  if (name == "sharpness") return ExperimentKind::Sharpness;
  if (name == "rudelson_audit") return ExperimentKind::RudelsonAudit;
  if (name == "variance_audit") return ExperimentKind::VarianceAudit;
  throw ConfigError("experiment config: unknown experiment '" + name + "'");
}

}  // namespace rmlab
