// ssdgp command-line interface.

#include "ssdgp/bench.hpp"
#include "ssdgp/cov_analysis.hpp"
#include "ssdgp/prior_sampling.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace ssdgp;

namespace {

constexpr int kConfigExit = 2;
constexpr int kSolverExit = 3;

/// Writes through `write` to path, or to stdout when path is empty.
template <typename F>
void write_output(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  write(out);
}

ExperimentConfig load_with_overrides(const std::string& path, const std::string& output, const std::string& format) {
  ExperimentConfig config = load_experiment_config(path);
  if (!output.empty()) config.output_path = output;
  if (!format.empty()) {
    if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
    config.output_format = format;
  }
  return config;
}

int run_command(const std::string& config_path, const std::string& output, const std::string& format) {
  const ExperimentConfig config = load_with_overrides(config_path, output, format);
  const ExperimentResult result = run_experiment(config);
  if (config.output_path.empty()) {
    if (config.output_format == "json") {
      write_results_json(result, config, std::cout);
    } else {
      write_results_csv(result, std::cout);
    }
    write_timing_csv(result, std::cerr);
  } else {
    emit_results(result, config);
  }
  for (const auto& t : result.trials) {
    if (!t.ok) std::cerr << "trial " << t.trial << " failed: " << t.message << '\n';
  }
  return result.summary.successes == 0 ? kSolverExit : 0;
}

int grid_command(const std::string& config_path, const std::string& grid_path, const std::string& output) {
  const ExperimentConfig config = load_experiment_config(config_path);
  std::ifstream in(grid_path);
  if (!in) throw ConfigError("cannot open grid " + grid_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grid " + grid_path + ": " + e.what());
  }
  const GridResult result = grid_search(config, parse_grid_spec(doc));
  write_output(output, [&](std::ostream& out) { write_grid_csv(result, out); });
  const GridCell& best = result.cells[result.best];
  std::cerr << "best: lengthscale " << format_double(best.lengthscale) << ", magnitude "
            << format_double(best.magnitude);
  if (best.fixed_magnitude) std::cerr << ", fixed magnitude " << format_double(*best.fixed_magnitude);
  std::cerr << ", score " << format_double(best.score) << '\n';
  return best.summary.successes == 0 ? kSolverExit : 0;
}

int sample_prior_command(const std::string& model_path, std::uint64_t seed, double t_end, double dt, int substeps,
                         const std::string& scheme, const std::string& output) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw ConfigError("t-end and dt must be positive");
  const DgpModel model = load_model(model_path);
  std::vector<double> times;
  const long steps = std::lround(t_end / dt);
  for (long k = 0; k <= steps; ++k) times.push_back(k * dt);
  const PriorSample sample = sample_prior(model, times, substeps, seed, Scheme::parse(scheme));
  write_output(output, [&](std::ostream& out) {
    out << 't';
    for (const auto& node : model.nodes()) out << ",u" << node.id.layer << '_' << node.id.position;
    out << '\n';
    for (std::size_t k = 0; k < sample.times.size(); ++k) {
      out << format_double(sample.times[k]);
      for (Eigen::Index j = 0; j < sample.node_paths.cols(); ++j) {
        out << ',' << format_double(sample.node_paths(static_cast<Eigen::Index>(k), j));
      }
      out << '\n';
    }
  });
  return 0;
}

int cov_analysis_command(CovRecursionConfig config, double r, int steps, int zero_at, const std::string& output) {
  if (steps < 1) throw ConfigError("steps must be positive");
  config.r_schedule.assign(steps, r);
  if (zero_at > 0) {
    if (zero_at > steps) throw ConfigError("zero-at must not exceed steps");
    config.r_schedule[zero_at - 1] = 0.0;
  }
  const CovRecursion rec = gf_covariance_recursion(config);
  const CovBound bound = covariance_bound(rec, config.p0_fs);
  write_output(output, [&](std::ostream& out) { write_recursion_csv(rec, bound, out); });
  std::cerr << "bound holds: " << (bound.holds ? "yes" : "no") << ", |P_fs| < 1e-4 from step "
            << bound.crossing_step << '\n';
  return 0;
}

int ingest_command(const std::string& input, std::optional<double> rate, double noise_var,
                   std::optional<double> spacing, const std::string& output) {
  TimeSeriesData data = ingest_strain_csv(input, noise_var, rate);
  const std::size_t measured = data.size();
  if (spacing) data = interpolation_grid(data, *spacing);
  write_output(output, [&](std::ostream& out) { write_series_csv(data, out); });
  std::cerr << measured << " measurements, " << data.size() - measured << " prediction-only steps\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-space deep Gaussian process regression"};
  app.require_subcommand(1);

  std::string config_path, grid_path, output, format, model_path, scheme = "tme-3", input;
  std::uint64_t seed = 0;
  double t_end = 1.0, dt = 0.01, r = 0.1, noise_var = 1.0;
  int substeps = 10, steps = 200, zero_at = 0;
  std::optional<double> rate, spacing;
  CovRecursionConfig cov;

  auto* run = app.add_subcommand("run", "Monte Carlo experiment from a config file");
  run->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "result file; stdout when omitted");
  run->add_option("--format", format, "csv or json");

  auto* grid = app.add_subcommand("grid", "grid search over last-layer hyperparameters");
  grid->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  grid->add_option("--grid", grid_path, "grid spec (JSON)")->required()->check(CLI::ExistingFile);
  grid->add_option("--output", output, "score table; stdout when omitted");

  auto* prior = app.add_subcommand("sample-prior", "draw one prior path of every node");
  prior->add_option("--model", model_path, "model file (JSON)")->required()->check(CLI::ExistingFile);
  prior->add_option("--seed", seed, "random seed")->required();
  prior->add_option("--t-end", t_end, "grid end time")->capture_default_str();
  prior->add_option("--dt", dt, "grid spacing")->capture_default_str();
  prior->add_option("--substeps", substeps, "transition steps per grid interval")->capture_default_str();
  prior->add_option("--scheme", scheme, "em, tme-1, tme-2, tme-3 or exact")->capture_default_str();
  prior->add_option("--output", output, "CSV file; stdout when omitted");

  auto* cova = app.add_subcommand("cov-analysis", "cross-covariance recursion of the two-state system");
  cova->add_option("--mu", cov.mu, "drift of f")->required();
  cova->add_option("--a", cov.a, "drift of u")->required();
  cova->add_option("--b", cov.b, "diffusion of u")->required();
  cova->add_option("--dt", cov.dt, "step size")->required();
  cova->add_option("--R", r, "measurement noise variance")->required();
  cova->add_option("--steps", steps, "number of updates")->required();
  cova->add_option("--p0-fs", cov.p0_fs, "initial cross-covariance")->capture_default_str();
  cova->add_option("--zero-at", zero_at, "step (1-based) whose noise variance is set to 0");
  cova->add_option("--output", output, "CSV file; stdout when omitted");

  auto* ingest = app.add_subcommand("ingest", "read a strain file and build the interpolation grid");
  ingest->add_option("--input", input, "strain CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--rate", rate, "sample rate in Hz for index or value rows");
  ingest->add_option("--noise-var", noise_var, "measurement noise variance")->capture_default_str();
  ingest->add_option("--spacing", spacing, "insert prediction-only steps at this spacing (s)");
  ingest->add_option("--output", output, "CSV file; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) return run_command(config_path, output, format);
    if (*grid) return grid_command(config_path, grid_path, output);
    if (*prior) return sample_prior_command(model_path, seed, t_end, dt, substeps, scheme, output);
    if (*cova) return cov_analysis_command(cov, r, steps, zero_at, output);
    if (*ingest) return ingest_command(input, rate, noise_var, spacing, output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kSolverExit;
  }
  return 0;
}
