#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rmlab/b_factors.hpp"
#include "rmlab/distributions.hpp"

namespace rmlab {

// One named Monte Carlo experiment per bound under study. Names in JSON
// configs use the snake_case tags returned by experiment_name().
enum class ExperimentKind {
  MainBound,      // ||BA|| against sqrt(n) + sqrt(m)
  LogBound,       // ||BA|| against sqrt(n log 2n)
  SmallColumns,   // ||BA|| against sqrt(M n), B with small column norms
  SparseNorm,     // sparse sign entries against log^(3/2)(e/p) sqrt(np + log 2N)
  Smin,           // s_min(A) against sqrt(m) - sqrt(n-1)
  Sharpness,      // heavy-tail growth of ||A|| / (sqrt(n) + sqrt(m))
  RudelsonAudit,  // sign-randomized tensor sums against the moment bound
  VarianceAudit,  // column norm statistics against n, 3n, Cn
};

// Product shape per group of trials: B is m x N, A is N x n, W = BA is
// m x n. Experiments whose bound is stated for a square product (log_bound,
// small_columns, sparse_norm) require m == n; smin samples A directly as an
// m x n matrix and needs m >= n; rudelson_audit uses m as the ambient
// dimension of the vector family.
struct DimTriple {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t N = 0;
};

// params / array_params / string_params form one open key-value record
// (JSON "params"); values route by type. Recognized keys per experiment are
// validated up front, e.g. "ceiling", "fit_quantile", "tol", "max_iter",
// "p_grid", "M", "eps", "sign_draws", "p_moment", "family", "family_size".
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::MainBound;
  std::vector<DimTriple> dims;
  EntryDistribution distribution;
  BFactorSpec b_factor;  // n/N are overridden per dims entry (rows = m)
  std::size_t trials = 1;
  std::uint64_t base_seed = 1;
  std::map<std::string, double> params;
  std::map<std::string, std::vector<double>> array_params;
  std::map<std::string, std::string> string_params;
};

struct TrialRecord {
  std::string experiment;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t trial = 0;     // index within its (dims, grid) group
  std::uint64_t seed = 0;    // the trial's full RNG stream seed
  double measured = 0.0;
  double normalizer = 0.0;
  double ratio = 0.0;        // measured / normalizer exactly
};

// records are ordered by global trial index (dims-major, grid, then trial),
// independent of thread count and completion order. aggregates hold derived
// statistics keyed by name; per-group keys are prefixed "g{d}_{g}_" with d
// the dims index and g the grid index.
struct ExperimentReport {
  std::vector<TrialRecord> records;
  double fitted_constant = 0.0;
  bool pass = true;
  std::map<std::string, double> aggregates;
};

// Runs cfg.experiment. Trials parallelize over `threads` workers; each
// trial's RNG stream derives solely from (base_seed, global trial index), so
// the report is identical for any thread count. Throws ConfigError on an
// invalid or mismatched configuration.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                unsigned threads = 1);

// Named entry points; each checks cfg.experiment matches.
ExperimentReport run_main_bound(const ExperimentConfig& cfg,
                                unsigned threads = 1);
ExperimentReport run_log_bound(const ExperimentConfig& cfg,
                               unsigned threads = 1);
ExperimentReport run_small_columns(const ExperimentConfig& cfg,
                                   unsigned threads = 1);
ExperimentReport run_sparse_norm(const ExperimentConfig& cfg,
                                 unsigned threads = 1);
ExperimentReport run_smin(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_sharpness(const ExperimentConfig& cfg,
                               unsigned threads = 1);
ExperimentReport run_rudelson_audit(const ExperimentConfig& cfg,
                                    unsigned threads = 1);
ExperimentReport run_variance_audit(const ExperimentConfig& cfg,
                                    unsigned threads = 1);

// Nearest-rank quantile of the ratios: with K records sorted ascending,
// returns the ceil(q K)-th smallest. q = 1 gives the maximum.
double fit_constant(const std::vector<TrialRecord>& records, double quantile);
double fit_constant(std::vector<double> ratios, double quantile);

// CSV with the exact header
//   experiment,m,n,N,trial,seed,measured,normalizer,ratio
// and floats at 17 significant digits. Byte-identical for identical reports.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
std::vector<TrialRecord> read_report_csv(std::istream& in);

// JSON round-trip matching ExperimentConfig field names exactly; dims as
// [m, n, N] arrays. Unknown fields or params are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

}  // namespace rmlab
