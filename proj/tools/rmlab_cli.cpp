// Command line front end for the rmlab library.
//
// Subcommands:
//   sample          draw a random matrix and write it to disk
//   norm            spectral norm of a stored matrix (power iteration or full SVD)
//   experiment run  execute an experiment config and write the trial CSV
//   experiment fit  recompute a quantile constant from a trial CSV
//
// Exit codes: 0 success, 1 a configured ceiling was violated, 2 bad input
// (malformed JSON, invalid parameters, unreadable files).

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "rmlab/distributions.hpp"
#include "rmlab/errors.hpp"
#include "rmlab/experiments.hpp"
#include "rmlab/matrix.hpp"
#include "rmlab/spectral.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCeiling = 1;
constexpr int kExitConfig = 2;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw rmlab::ConfigError("cannot open file for reading: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_sample(const std::string& dist_json, std::size_t rows, std::size_t cols,
               std::uint64_t seed, const std::string& out_path) {
  const rmlab::EntryDistribution dist = rmlab::distribution_from_json(dist_json);
  const rmlab::Matrix a = rmlab::sample_matrix(dist, rows, cols, seed);
  rmlab::save_matrix(out_path, a);
  std::cout << "wrote " << rows << "x" << cols << " matrix to " << out_path << "\n";
  return kExitOk;
}

int cmd_norm(const std::string& in_path, const std::string& method, double tol) {
  const rmlab::Matrix a = rmlab::load_matrix(in_path);
  if (method == "full") {
    const std::vector<double> sv = rmlab::singular_values_full(a);
    std::cout << rmlab::format_double(sv.empty() ? 0.0 : sv.front()) << "\n";
    return kExitOk;
  }
  const rmlab::SpectralResult r = rmlab::spectral_norm(a, tol);
  std::cout << rmlab::format_double(r.value) << "\n";
  if (!r.converged) {
    std::cerr << "warning: power iteration did not meet tol " << rmlab::format_double(tol)
              << " (residual " << rmlab::format_double(r.residual) << " after " << r.iterations
              << " iterations)\n";
  }
  return kExitOk;
}

int cmd_experiment_run(const std::string& config_path, const std::string& out_path,
                       unsigned threads) {
  const rmlab::ExperimentConfig cfg = rmlab::config_from_json(read_text_file(config_path));
  const rmlab::ExperimentReport report = rmlab::run_experiment(cfg, threads);

  std::ofstream out(out_path);
  if (!out) {
    throw rmlab::ConfigError("cannot open file for writing: " + out_path);
  }
  rmlab::write_report_csv(out, report);
  if (!out) {
    throw rmlab::ConfigError("failed while writing CSV to " + out_path);
  }

  std::cout << "experiment " << rmlab::experiment_name(cfg.experiment) << "\n";
  std::cout << "records " << report.records.size() << "\n";
  std::cout << "fitted_constant " << rmlab::format_double(report.fitted_constant) << "\n";
  for (const auto& [key, value] : report.aggregates) {
    std::cout << "aggregate " << key << " " << rmlab::format_double(value) << "\n";
  }
  const auto ceiling = cfg.params.find("ceiling");
  if (ceiling != cfg.params.end()) {
    std::cout << "ceiling " << rmlab::format_double(ceiling->second) << " "
              << (report.pass ? "ok" : "violated") << "\n";
  }
  return report.pass ? kExitOk : kExitCeiling;
}

int cmd_experiment_fit(const std::string& in_path, double quantile) {
  std::ifstream in(in_path);
  if (!in) {
    throw rmlab::ConfigError("cannot open file for reading: " + in_path);
  }
  const std::vector<rmlab::TrialRecord> records = rmlab::read_report_csv(in);
  const double c = rmlab::fit_constant(records, quantile);
  std::cout << "fit_constant " << rmlab::format_double(c) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmlab: random matrix spectral statistics laboratory"};
  app.require_subcommand(1);

  // sample
  std::string dist_json;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 1;
  std::string sample_out;
  CLI::App* sample = app.add_subcommand("sample", "Draw a random matrix and store it");
  sample->add_option("--dist", dist_json, "Entry distribution as a JSON object")->required();
  sample->add_option("--rows", rows, "Number of rows")->required()->check(CLI::PositiveNumber);
  sample->add_option("--cols", cols, "Number of columns")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--out", sample_out, "Output path")->required();

  // norm
  std::string norm_in;
  std::string method = "power";
  double tol = 1e-10;
  CLI::App* norm = app.add_subcommand("norm", "Spectral norm of a stored matrix");
  norm->add_option("--in", norm_in, "Matrix file written by `sample`")->required();
  norm->add_option("--method", method, "power or full")
      ->check(CLI::IsMember({"power", "full"}));
  norm->add_option("--tol", tol, "Relative tolerance for power iteration")
      ->check(CLI::PositiveNumber);

  // experiment run / fit
  CLI::App* experiment = app.add_subcommand("experiment", "Run or refit experiments");
  experiment->require_subcommand(1);

  std::string run_config;
  std::string run_out;
  unsigned threads = 1;
  CLI::App* run = experiment->add_subcommand("run", "Execute a config and write the trial CSV");
  run->add_option("--config", run_config, "Experiment config JSON file")->required();
  run->add_option("--out", run_out, "Output CSV path")->required();
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string fit_in;
  double quantile = 1.0;
  CLI::App* fit = experiment->add_subcommand("fit", "Fit a quantile constant from a trial CSV");
  fit->add_option("--in", fit_in, "Trial CSV written by `experiment run`")->required();
  fit->add_option("--quantile", quantile, "Quantile in (0, 1]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sample->parsed()) {
      return cmd_sample(dist_json, rows, cols, seed, sample_out);
    }
    if (norm->parsed()) {
      return cmd_norm(norm_in, method, tol);
    }
    if (run->parsed()) {
      return cmd_experiment_run(run_config, run_out, threads);
    }
    if (fit->parsed()) {
      return cmd_experiment_fit(fit_in, quantile);
    }
  } catch (const rmlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
