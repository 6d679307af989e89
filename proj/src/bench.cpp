#include "ssdgp/bench.hpp"

#include "ssdgp/batch_gp.hpp"
#include "ssdgp/gaussian_filter.hpp"
#include "ssdgp/map.hpp"
#include "ssdgp/particle.hpp"
#include "ssdgp/rng.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace ssdgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TimeSeriesData generate(int count, double noise_var, std::uint64_t seed, double (*signal)(double)) {
  if (count < 1) throw ConfigError("signal size must be positive");
  if (!(noise_var >= 0.0)) throw ConfigError("noise variance must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TimeSeriesData data;
  std::vector<double> truth;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const double f = signal(t);
    data.times.push_back(t);
    truth.push_back(f);
    data.y.push_back(f + std::sqrt(noise_var) * normal(rng));
    data.noise_var.push_back(noise_var);
  }
  data.truth = std::move(truth);
  return data;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_row(const std::string& line, const std::string& path, int lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": cannot parse '" + cell + "'");
    }
    out.push_back(v);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

std::vector<double> observed_f(const DgpModel& model, const std::vector<GaussianBelief>& beliefs) {
  std::vector<double> mean, var;
  observe(beliefs, model.observation_row(), mean, var);
  return mean;
}

/// Measured points only, as required by the batch solvers.
TimeSeriesData measured_subset(const TimeSeriesData& data) {
  TimeSeriesData out;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!data.has_measurement(k)) continue;
    out.times.push_back(data.times[k]);
    out.y.push_back(data.y[k]);
    out.noise_var.push_back(data.noise_var[k]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double rectangle_signal(double t) {
  if (t >= 1.0 / 6.0 && t < 2.0 / 6.0) return 1.0;
  if (t >= 3.0 / 6.0 && t < 4.0 / 6.0) return 0.6;
  if (t >= 5.0 / 6.0 && t <= 1.0) return 0.4;
  return 0.0;
}

double sinusoid_signal(double t) {
  const double s = std::sin(7.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * t * t) * t);
  return s * s / (std::cos(5.0 * std::numbers::pi * t) + 2.0);
}

TimeSeriesData gen_rectangle(int count, double noise_var, std::uint64_t seed) {
  return generate(count, noise_var, seed, rectangle_signal);
}

TimeSeriesData gen_sinusoid(int count, double noise_var, std::uint64_t seed) {
  return generate(count, noise_var, seed, sinusoid_signal);
}

double rmse(const std::vector<double>& truth, const std::vector<double>& estimate) {
  if (truth.size() != estimate.size()) throw ConfigError("rmse: length mismatch");
  if (truth.empty()) throw ConfigError("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
  return std::sqrt(s / static_cast<double>(truth.size()));
}

TimeSeriesData ingest_strain_csv(const std::string& path, double noise_var, std::optional<double> rate) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  if (rate && !(*rate > 0.0)) throw ConfigError(path + ": sample rate must be positive");
  TimeSeriesData data;
  std::string line;
  int lineno = 0;
  long index = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("rate=");
      if (pos != std::string::npos) {
        rate = std::strtod(line.c_str() + pos + 5, nullptr);
        if (!(*rate > 0.0)) throw ConfigError(path + ": sample rate must be positive");
      }
      continue;
    }
    if (index == 0 && !header_seen && std::isalpha(static_cast<unsigned char>(line[0])) && line.find(',') != std::string::npos &&
        line.rfind("nan", 0) != 0 && line.rfind("inf", 0) != 0) {
      header_seen = true;
      continue;
    }
    const std::vector<double> row = parse_row(line, path, lineno);
    double t = 0.0, v = 0.0;
    if (rate) {
      if (row.size() == 1) {
        t = index / *rate;
        v = row[0];
      } else if (row.size() == 2) {
        t = row[0] / *rate;
        v = row[1];
      } else {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'index,value' or 'value'");
      }
    } else {
      if (row.size() != 2 && row.size() != 3) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'time,value[,noise_var]'");
      }
      t = row[0];
      v = row[1];
    }
    const double r = row.size() == 3 && !rate ? row[2] : noise_var;
    if (!(r > 0.0)) throw ConfigError(path + ":" + std::to_string(lineno) + ": noise variance must be positive");
    ++index;
    if (!data.times.empty() && !(t > data.times.back())) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": times must increase strictly");
    }
    data.times.push_back(t);
    data.y.push_back(v);
    data.noise_var.push_back(r);
  }
  if (data.times.empty()) throw ConfigError(path + ": no data rows");
  return data;
}

TimeSeriesData interpolation_grid(const TimeSeriesData& data, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("interpolation spacing must be positive");
  data.validate();
  TimeSeriesData out;
  const bool truth = data.truth.has_value();
  if (truth) out.truth.emplace();
  for (std::size_t k = 0; k < data.size(); ++k) {
    out.times.push_back(data.times[k]);
    out.y.push_back(data.y[k]);
    out.noise_var.push_back(data.noise_var[k]);
    if (truth) out.truth->push_back((*data.truth)[k]);
    if (k + 1 == data.size()) break;
    // keep inserted points clear of the next measurement
    for (int j = 1;; ++j) {
      const double t = data.times[k] + j * spacing;
      if (t >= data.times[k + 1] - 1e-3 * spacing) break;
      out.times.push_back(t);
      out.y.push_back(kNaN);
      out.noise_var.push_back(data.noise_var[k]);
      if (truth) out.truth->push_back(kNaN);
    }
  }
  return out;
}

void write_series_csv(const TimeSeriesData& data, std::ostream& out) {
  out << "t,y,noise_var\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    out << format_double(data.times[k]) << ',' << format_double(data.has_measurement(k) ? data.y[k] : kNaN) << ','
        << format_double(data.noise_var[k]) << '\n';
  }
}

Solver parse_solver(const std::string& name) {
  if (name == "gp-mle") return Solver::GpMle;
  if (name == "bmap") return Solver::BatchMap;
  if (name == "ssmap") return Solver::SsMap;
  if (name == "ekfs") return Solver::Ekfs;
  if (name == "ckfs") return Solver::Ckfs;
  if (name == "pf") return Solver::Pf;
  if (name == "pfbs") return Solver::PfBs;
  throw ConfigError("unknown solver '" + name + "'");
}

std::string solver_name(Solver s) {
  switch (s) {
    case Solver::GpMle: return "gp-mle";
    case Solver::BatchMap: return "bmap";
    case Solver::SsMap: return "ssmap";
    case Solver::Ekfs: return "ekfs";
    case Solver::Ckfs: return "ckfs";
    case Solver::Pf: return "pf";
    case Solver::PfBs: return "pfbs";
  }
  return "";
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& base_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (fs::path(base_dir) / p).string(); };
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    if (!doc.contains("model")) throw ConfigError("config: missing 'model'");
    const auto& model = doc.at("model");
    c.model = model.is_string() ? load_model(resolve(model.get<std::string>())) : parse_model(model);

    if (!doc.contains("solver")) throw ConfigError("config: missing 'solver'");
    c.solver = parse_solver(doc.at("solver").get<std::string>());
    if (doc.contains("scheme")) {
      if (c.solver == Solver::GpMle || c.solver == Solver::BatchMap) {
        throw ConfigError("config: solver " + solver_name(c.solver) + " takes no scheme");
      }
      c.scheme = Scheme::parse(doc.at("scheme").get<std::string>());
    }

    if (doc.contains("data")) {
      const auto& d = doc.at("data");
      c.data.signal = d.value("signal", c.data.signal);
      if (c.data.signal == "sinusoid") c.data.noise_var = 0.01;
      c.data.size = d.value("size", c.data.size);
      c.data.noise_var = d.value("noise_var", c.data.noise_var);
      if (d.contains("path")) c.data.path = resolve(d.at("path").get<std::string>());
      if (d.contains("interpolate")) c.data.interpolate = d.at("interpolate").get<double>();
    }
    if (c.data.signal != "rectangle" && c.data.signal != "sinusoid" && c.data.signal != "file") {
      throw ConfigError("config: unknown signal '" + c.data.signal + "'");
    }
    if (c.data.signal == "file" && c.data.path.empty()) throw ConfigError("config: file signal needs 'path'");
    if (c.data.signal != "file" && c.data.size < 1) throw ConfigError("config: data size must be positive");
    if (!(c.data.noise_var > 0.0)) throw ConfigError("config: noise_var must be positive");

    c.trials = doc.value("trials", 1);
    if (c.trials < 1) throw ConfigError("config: trials must be positive");
    c.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("options")) {
      const auto& o = doc.at("options");
      c.options.particles = o.value("particles", c.options.particles);
      c.options.backward = o.value("backward", c.options.backward);
      c.options.max_iterations = o.value("max_iterations", c.options.max_iterations);
      c.options.tolerance = o.value("tolerance", c.options.tolerance);
    }
    if (c.options.particles < 2) throw ConfigError("config: particles must be at least 2");
    if (c.options.backward < 1) throw ConfigError("config: backward must be positive");
    if (c.options.max_iterations < 1) throw ConfigError("config: max_iterations must be positive");
    if (doc.contains("output")) {
      const auto& o = doc.at("output");
      if (o.contains("path")) c.output_path = resolve(o.at("path").get<std::string>());
      c.output_format = o.value("format", c.output_format);
    }
    if (c.output_format != "csv" && c.output_format != "json") {
      throw ConfigError("config: output format must be csv or json");
    }
    if (c.solver == Solver::GpMle && c.model.num_nodes() != 1) {
      throw ConfigError("config: gp-mle needs a single-node model");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_experiment_config(doc, std::filesystem::path(path).parent_path().string());
}

TimeSeriesData trial_data(const ExperimentConfig& config, std::uint64_t trial_seed) {
  const DataSpec& d = config.data;
  TimeSeriesData data;
  const std::uint64_t seed = stream_seed(trial_seed, 0);
  if (d.signal == "rectangle") {
    data = gen_rectangle(d.size, d.noise_var, seed);
  } else if (d.signal == "sinusoid") {
    data = gen_sinusoid(d.size, d.noise_var, seed);
  } else {
    data = ingest_strain_csv(d.path, d.noise_var);
  }
  if (d.interpolate) data = interpolation_grid(data, *d.interpolate);
  return data;
}

SolverOutput run_solver(const ExperimentConfig& config, const TimeSeriesData& data, std::uint64_t solver_seed) {
  const DgpModel& model = config.model;
  OptimizeOptions opt;
  opt.max_iterations = config.options.max_iterations;
  opt.gradient_tolerance = config.options.tolerance;
  SolverOutput out;

  switch (config.solver) {
    case Solver::GpMle: {
      const DgpNodeSpec& node = model.nodes()[0];
      const MaternSpec init{node.alpha, node.lengthscale.parent ? 1.0 : node.lengthscale.value,
                            node.magnitude.parent ? 1.0 : node.magnitude.value};
      const GpMleResult r = fit_matern_gp(data, node.alpha, init, opt);
      out.f.assign(r.posterior.mean.data(), r.posterior.mean.data() + r.posterior.mean.size());
      out.nlpd = r.negative_log_marginal;
      return out;
    }
    case Solver::BatchMap: {
      const TimeSeriesData m = measured_subset(data);
      if (m.size() != data.size()) throw ConfigError("bmap does not support prediction-only points");
      const MapSolution s = solve_batch_map(BatchMapProblem{model, m}, opt);
      out.f.assign(s.f.data(), s.f.data() + s.f.size());
      return out;
    }
    default:
      break;
  }

  const TransitionCache cache(model, config.effective_scheme());
  switch (config.solver) {
    case Solver::SsMap: {
      const MapSolution s = solve_ss_map(SsMapProblem(cache, data), opt);
      out.f.assign(s.f.data(), s.f.data() + s.f.size());
      return out;
    }
    case Solver::Ekfs:
    case Solver::Ckfs: {
      const auto kind = config.solver == Solver::Ekfs ? GaussianFilterKind::Extended : GaussianFilterKind::Cubature;
      const FilterOutput f = gaussian_filter(kind, cache, data);
      out.f = observed_f(model, rts_smooth(f).steps);
      out.nlpd = nlpd(f, data);
      return out;
    }
    case Solver::Pf:
    case Solver::PfBs: {
      ParticleOptions po;
      po.particles = config.options.particles;
      po.seed = stream_seed(solver_seed, 0);
      const ParticleFilterOutput pf = bootstrap_pf(cache, data, po);
      out.nlpd = -pf.log_likelihood;
      const int root = model.root_index();
      if (config.solver == Solver::Pf) {
        for (const auto& c : pf.clouds) out.f.push_back(c.mean()(root));
      } else {
        const Matrix mean =
            backward_simulation_smoother(cache, pf, config.options.backward, stream_seed(solver_seed, 1)).mean();
        for (Eigen::Index k = 0; k < mean.rows(); ++k) out.f.push_back(mean(k, root));
      }
      return out;
    }
    default:
      break;
  }
  throw ConfigError("unsupported solver");
}

Summary summarize(const std::vector<TrialResult>& trials) {
  Summary s;
  std::vector<double> rm, nl, sec;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++s.failures;
      continue;
    }
    ++s.successes;
    if (std::isfinite(t.rmse)) rm.push_back(t.rmse);
    if (std::isfinite(t.nlpd)) nl.push_back(t.nlpd);
    sec.push_back(t.seconds);
  }
  if (!rm.empty()) {
    s.rmse_mean = mean_of(rm);
    s.rmse_std = std_of(rm);
  }
  if (!nl.empty()) {
    s.nlpd_mean = mean_of(nl);
    s.nlpd_std = std_of(nl);
  }
  if (!sec.empty()) s.seconds_mean = mean_of(sec);
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  for (int i = 0; i < config.trials; ++i) {
    TrialResult t;
    t.trial = i;
    t.seed = stream_seed(config.seed, static_cast<std::uint64_t>(i));
    const TimeSeriesData data = trial_data(config, t.seed);
    try {
      const auto start = std::chrono::steady_clock::now();
      const SolverOutput s = run_solver(config, data, stream_seed(t.seed, 1));
      t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      bool finite = true;
      for (double v : s.f) finite = finite && std::isfinite(v);
      if (!finite) throw NumericalError("non-finite estimate");
      if (data.truth) {
        std::vector<double> truth, est;
        for (std::size_t k = 0; k < data.size(); ++k) {
          if (!std::isfinite((*data.truth)[k])) continue;
          truth.push_back((*data.truth)[k]);
          est.push_back(s.f[k]);
        }
        t.rmse = rmse(truth, est);
      }
      t.nlpd = s.nlpd;
      t.ok = true;
    } catch (const NumericalError& e) {
      t.ok = false;
      t.message = e.what();
    }
    result.trials.push_back(t);
  }
  result.summary = summarize(result.trials);
  return result;
}

void write_results_csv(const ExperimentResult& result, std::ostream& out) {
  out << "trial,seed,status,rmse,nlpd,message\n";
  for (const auto& t : result.trials) {
    out << t.trial << ',' << t.seed << ',' << (t.ok ? "ok" : "failed") << ',' << format_double(t.rmse) << ','
        << format_double(t.nlpd) << ',' << csv_quote(t.message) << '\n';
  }
  const Summary& s = result.summary;
  out << "mean,," << s.successes << " ok / " << s.failures << " failed," << format_double(s.rmse_mean) << ','
      << format_double(s.nlpd_mean) << ",\"\"\n";
  out << "std,,," << format_double(s.rmse_std) << ',' << format_double(s.nlpd_std) << ",\"\"\n";
}

void write_results_json(const ExperimentResult& result, const ExperimentConfig& config, std::ostream& out) {
  const Summary& s = result.summary;
  out << "{\n  \"solver\": \"" << solver_name(config.solver) << "\",\n";
  out << "  \"scheme\": " << (config.scheme ? "\"" + config.scheme->name() + "\"" : std::string("null")) << ",\n";
  out << "  \"signal\": \"" << config.data.signal << "\",\n";
  out << "  \"seed\": " << config.seed << ",\n  \"trials\": [\n";
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& t = result.trials[i];
    out << "    {\"trial\": " << t.trial << ", \"seed\": " << t.seed << ", \"status\": \"" << (t.ok ? "ok" : "failed")
        << "\", \"rmse\": " << json_number(t.rmse) << ", \"nlpd\": " << json_number(t.nlpd)
        << ", \"message\": " << nlohmann::json(t.message).dump() << "}" << (i + 1 < result.trials.size() ? "," : "")
        << "\n";
  }
  out << "  ],\n  \"summary\": {\"successes\": " << s.successes << ", \"failures\": " << s.failures
      << ", \"rmse_mean\": " << json_number(s.rmse_mean) << ", \"rmse_std\": " << json_number(s.rmse_std)
      << ", \"nlpd_mean\": " << json_number(s.nlpd_mean) << ", \"nlpd_std\": " << json_number(s.nlpd_std) << "}\n}\n";
}

void write_timing_csv(const ExperimentResult& result, std::ostream& out) {
  out << "trial,seconds\n";
  for (const auto& t : result.trials) out << t.trial << ',' << format_double(t.seconds) << '\n';
  out << "mean," << format_double(result.summary.seconds_mean) << '\n';
}

void emit_results(const ExperimentResult& result, const ExperimentConfig& config) {
  if (config.output_path.empty()) throw ConfigError("no output path configured");
  {
    std::ofstream out(config.output_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + config.output_path);
    if (config.output_format == "json") {
      write_results_json(result, config, out);
    } else {
      write_results_csv(result, out);
    }
  }
  std::ofstream timing(config.output_path + ".timing.csv", std::ios::binary);
  if (!timing) throw ConfigError("cannot write " + config.output_path + ".timing.csv");
  write_timing_csv(result, timing);
}

GridSpec parse_grid_spec(const nlohmann::json& doc) {
  try {
    GridSpec g;
    g.lengthscale = doc.at("lengthscale").get<std::vector<double>>();
    g.magnitude = doc.at("magnitude").get<std::vector<double>>();
    if (doc.contains("fixed_magnitude")) g.fixed_magnitude = doc.at("fixed_magnitude").get<std::vector<double>>();
    if (g.lengthscale.empty() || g.magnitude.empty()) throw ConfigError("grid: empty value list");
    for (double v : g.lengthscale) {
      if (!(v > 0.0)) throw ConfigError("grid: lengthscales must be positive");
    }
    for (double v : g.magnitude) {
      if (!(v >= 0.0)) throw ConfigError("grid: magnitudes must be non-negative");
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

DgpModel with_hyperparameters(const DgpModel& model, double ell, double sigma, std::optional<double> fixed_magnitude) {
  std::vector<DgpNodeSpec> nodes = model.nodes();
  for (auto& n : nodes) {
    const bool leaf = !n.lengthscale.parent && !n.magnitude.parent;
    if (leaf) {
      n.lengthscale.value = ell;
      n.magnitude.value = sigma;
    } else if (fixed_magnitude && !n.magnitude.parent) {
      n.magnitude.value = *fixed_magnitude;
    }
  }
  return build_dgp(std::move(nodes));
}

GridResult grid_search(const ExperimentConfig& config, const GridSpec& grid) {
  GridResult out;
  std::vector<std::optional<double>> fixed;
  if (grid.fixed_magnitude.empty()) {
    fixed.push_back(std::nullopt);
  } else {
    for (double v : grid.fixed_magnitude) fixed.push_back(v);
  }
  for (const auto& fm : fixed) {
    for (double ell : grid.lengthscale) {
      for (double sigma : grid.magnitude) {
        ExperimentConfig c = config;
        c.model = with_hyperparameters(config.model, ell, sigma, fm);
        const ExperimentResult r = run_experiment(c);
        GridCell cell{ell, sigma, fm, r.summary, std::numeric_limits<double>::infinity()};
        const double score = std::isfinite(r.summary.rmse_mean) ? r.summary.rmse_mean : r.summary.nlpd_mean;
        if (r.summary.successes > 0 && std::isfinite(score)) cell.score = score;
        out.cells.push_back(cell);
      }
    }
  }
  auto better = [](const GridCell& a, const GridCell& b) {
    if (a.summary.failures != b.summary.failures) return a.summary.failures < b.summary.failures;
    if (a.score != b.score) return a.score < b.score;
    if (a.lengthscale != b.lengthscale) return a.lengthscale < b.lengthscale;
    if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
    return a.fixed_magnitude.value_or(0.0) < b.fixed_magnitude.value_or(0.0);
  };
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    if (better(out.cells[i], out.cells[out.best])) out.best = i;
  }
  return out;
}

void write_grid_csv(const GridResult& result, std::ostream& out) {
  out << "lengthscale,magnitude,fixed_magnitude,successes,failures,rmse_mean,nlpd_mean,score,best\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridCell& c = result.cells[i];
    out << format_double(c.lengthscale) << ',' << format_double(c.magnitude) << ','
        << (c.fixed_magnitude ? format_double(*c.fixed_magnitude) : "") << ',' << c.summary.successes << ','
        << c.summary.failures << ',' << format_double(c.summary.rmse_mean) << ','
        << format_double(c.summary.nlpd_mean) << ',' << format_double(c.score) << ','
        << (i == result.best ? 1 : 0) << '\n';
  }
}

}  // namespace ssdgp
