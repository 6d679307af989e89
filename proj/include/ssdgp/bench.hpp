#pragma once

// Benchmark harness: synthetic signals, metrics, Monte Carlo experiments,
// grid search over shared last-layer hyperparameters, strain-file ingestion
// and byte-stable result files.

#include "ssdgp/dgp_model.hpp"
#include "ssdgp/discretize.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace ssdgp {

// ---- signals ---------------------------------------------------------------

double rectangle_signal(double t);
double sinusoid_signal(double t);

/// T evenly spaced points on [0, 1] with N(0, noise_var) measurement noise.
TimeSeriesData gen_rectangle(int count, double noise_var, std::uint64_t seed);
TimeSeriesData gen_sinusoid(int count, double noise_var, std::uint64_t seed);

// ---- metrics ---------------------------------------------------------------

/// Errors: ConfigError on length mismatch or empty input.
double rmse(const std::vector<double>& truth, const std::vector<double>& estimate);

// ---- strain data -----------------------------------------------------------

/// Reads "time,value[,noise_var]" rows. Lines starting with '#' are comments; a
/// comment of the form "# rate=<Hz>" switches to "index,value" or "value" rows
/// with time = index / rate. Rows without a variance column get noise_var.
/// A non-numeric header line such as "t,y,noise_var" is skipped. A given rate
/// acts like a "# rate=" line at the top of the file.
/// Errors: ConfigError for unreadable, empty or non-monotone files.
TimeSeriesData ingest_strain_csv(const std::string& path, double noise_var = 1.0,
                                 std::optional<double> rate = std::nullopt);

/// Inserts prediction-only points (y = NaN) every spacing seconds between measurements.
TimeSeriesData interpolation_grid(const TimeSeriesData& data, double spacing);

/// "t,y,noise_var" rows; non-finite y is written as "nan".
void write_series_csv(const TimeSeriesData& data, std::ostream& out);

// ---- experiments -----------------------------------------------------------

enum class Solver { GpMle, BatchMap, SsMap, Ekfs, Ckfs, Pf, PfBs };

Solver parse_solver(const std::string& name);
std::string solver_name(Solver s);

struct DataSpec {
  std::string signal = "rectangle";  // rectangle | sinusoid | file
  int size = 100;
  double noise_var = 0.002;
  std::string path;                  // file signal
  std::optional<double> interpolate; // grid spacing for prediction-only steps
};

struct SolverOptions {
  int particles = 1000;
  int backward = 100;
  int max_iterations = 500;
  double tolerance = 1e-6;
};

struct ExperimentConfig {
  DgpModel model;
  Solver solver = Solver::Ckfs;
  std::optional<Scheme> scheme;  // absent for gp-mle and bmap
  DataSpec data;
  int trials = 1;
  std::uint64_t seed = 0;
  SolverOptions options;
  std::string output_path;
  std::string output_format = "csv";

  /// Scheme used by state-space solvers (tme-3 when not given).
  Scheme effective_scheme() const { return scheme.value_or(Scheme{}); }
};

/// Errors: ConfigError for unknown keys' values, missing fields or incompatible solver/scheme.
/// Relative model and data paths resolve against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double nlpd = std::numeric_limits<double>::quiet_NaN();  // NaN when not applicable
  double seconds = 0.0;
  std::string message;
};

struct Summary {
  int successes = 0;
  int failures = 0;
  double rmse_mean = std::numeric_limits<double>::quiet_NaN();
  double rmse_std = std::numeric_limits<double>::quiet_NaN();
  double nlpd_mean = std::numeric_limits<double>::quiet_NaN();
  double nlpd_std = std::numeric_limits<double>::quiet_NaN();
  double seconds_mean = 0.0;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  Summary summary;
};

/// Estimate of f at the data times and the NLPD (NaN for MAP solvers).
struct SolverOutput {
  std::vector<double> f;
  double nlpd = std::numeric_limits<double>::quiet_NaN();
};

/// Runs one solver on one data set. solver_seed drives the particle methods.
SolverOutput run_solver(const ExperimentConfig& config, const TimeSeriesData& data, std::uint64_t solver_seed);

/// Data for one trial: generated from the trial seed, or read from the configured file.
TimeSeriesData trial_data(const ExperimentConfig& config, std::uint64_t trial_seed);

/// Trials use seeds derived from the master seed; numerical failures are recorded per trial.
ExperimentResult run_experiment(const ExperimentConfig& config);

Summary summarize(const std::vector<TrialResult>& trials);

/// Writes config.output_path in config.output_format and the wall times to
/// "<path>.timing.csv", so the result file depends only on config and seed.
void emit_results(const ExperimentResult& result, const ExperimentConfig& config);
void write_results_csv(const ExperimentResult& result, std::ostream& out);
void write_results_json(const ExperimentResult& result, const ExperimentConfig& config, std::ostream& out);
void write_timing_csv(const ExperimentResult& result, std::ostream& out);

// ---- grid search -----------------------------------------------------------

/// Values for the shared last-layer (lengthscale, magnitude) and, optionally,
/// for every fixed magnitude above the last layer.
struct GridSpec {
  std::vector<double> lengthscale;
  std::vector<double> magnitude;
  std::vector<double> fixed_magnitude;
};

GridSpec parse_grid_spec(const nlohmann::json& doc);

/// Last-layer nodes (no linked parameters) get (ell, sigma); fixed magnitudes of
/// other nodes get fixed_magnitude when it is set.
DgpModel with_hyperparameters(const DgpModel& model, double ell, double sigma, std::optional<double> fixed_magnitude);

struct GridCell {
  double lengthscale;
  double magnitude;
  std::optional<double> fixed_magnitude;
  Summary summary;
  double score;  // mean RMSE with truth, mean NLPD without; +inf when every trial failed
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
};

/// Exhaustive evaluation. Cells with fewer failed trials rank first, then by score;
/// ties go to the smaller lengthscale, then the smaller magnitude.
GridResult grid_search(const ExperimentConfig& config, const GridSpec& grid);
void write_grid_csv(const GridResult& result, std::ostream& out);

/// %.17g, or "nan".
std::string format_double(double v);

}  // namespace ssdgp
