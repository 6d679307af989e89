#include "ssdgp/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ssdgp;

namespace {

const char* kSingleNode = R"({"nodes": [{"layer": 1, "position": 1, "alpha": 0, "lengthscale": 0.1, "magnitude": 1.0}]})";

nlohmann::json base_config(const std::string& solver) {
  nlohmann::json c;
  c["model"] = nlohmann::json::parse(kSingleNode);
  c["solver"] = solver;
  c["data"] = {{"signal", "rectangle"}, {"size", 40}};
  c["trials"] = 3;
  c["seed"] = 11;
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ssdgp_bench_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Signals, RectangleLevels) {
  EXPECT_EQ(rectangle_signal(0.0), 0.0);
  EXPECT_EQ(rectangle_signal(0.25), 1.0);
  EXPECT_EQ(rectangle_signal(0.45), 0.0);
  EXPECT_EQ(rectangle_signal(0.55), 0.6);
  EXPECT_EQ(rectangle_signal(0.75), 0.0);
  EXPECT_EQ(rectangle_signal(0.9), 0.4);
  EXPECT_EQ(rectangle_signal(1.0), 0.4);
}

TEST(Signals, SinusoidValues) {
  EXPECT_EQ(sinusoid_signal(0.0), 0.0);
  EXPECT_NEAR(sinusoid_signal(1.0), 0.0, 1e-28);
  EXPECT_NEAR(sinusoid_signal(0.3), 0.213859520415205873417660488309, 1e-14);
  EXPECT_NEAR(sinusoid_signal(0.9), 0.355284620456162547324957374768, 1e-14);
}

TEST(Signals, GeneratedSeriesAreReproducible) {
  const TimeSeriesData a = gen_rectangle(100, 0.002, 5);
  const TimeSeriesData b = gen_rectangle(100, 0.002, 5);
  ASSERT_EQ(a.size(), 100u);
  EXPECT_EQ(a.times.front(), 0.0);
  EXPECT_EQ(a.times.back(), 1.0);
  EXPECT_EQ(a.y, b.y);
  ASSERT_TRUE(a.truth);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a.y[k] - (*a.truth)[k]) * (a.y[k] - (*a.truth)[k]);
  EXPECT_NEAR(s / 100.0, 0.002, 0.0012);
  EXPECT_NE(gen_rectangle(100, 0.002, 6).y, a.y);
}

TEST(Metrics, Rmse) {
  EXPECT_EQ(rmse({1.0, 2.0}, {1.0, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(rmse({0.0, 0.0}, {3.0, 4.0}), std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(rmse({0.5, -1.0, 2.0}, {0.25, -1.25, 1.75}), 0.25);
  EXPECT_THROW(rmse({1.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(rmse({}, {}), ConfigError);
}

TEST(Metrics, RmseMatchesDirectFormula) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(37), b(37);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng);
      sum += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
    }
    const double direct = static_cast<double>(std::sqrt(sum / a.size()));
    EXPECT_NEAR(rmse(a, b), direct, 1e-12 * direct);
  }
}

TEST(Config, ParseErrors) {
  EXPECT_NO_THROW(parse_experiment_config(base_config("ckfs")));
  EXPECT_THROW(parse_experiment_config(base_config("kf")), ConfigError);
  auto c = base_config("gp-mle");
  c["scheme"] = "tme-3";
  EXPECT_THROW(parse_experiment_config(c), ConfigError);
  c = base_config("ckfs");
  c["scheme"] = "tme-9";
  EXPECT_THROW(parse_experiment_config(c), ConfigError);
  c = base_config("ckfs");
  c["trials"] = 0;
  EXPECT_THROW(parse_experiment_config(c), ConfigError);
  c = base_config("ckfs");
  c["data"]["signal"] = "square";
  EXPECT_THROW(parse_experiment_config(c), ConfigError);
  c = base_config("ckfs");
  c["model"] = "missing_model.json";
  EXPECT_THROW(parse_experiment_config(c), ConfigError);
  c = base_config("ckfs");
  c["trials"] = "many";
  EXPECT_THROW(parse_experiment_config(c), ConfigError);
  EXPECT_THROW(load_experiment_config(temp_path("absent.json")), ConfigError);
  EXPECT_EQ(parse_experiment_config(base_config("pf")).effective_scheme().name(), "tme-3");
}

TEST(Experiment, SingleTrialHasZeroStd) {
  auto c = base_config("ckfs");
  c["trials"] = 1;
  const ExperimentResult r = run_experiment(parse_experiment_config(c));
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_TRUE(r.trials[0].ok);
  EXPECT_EQ(r.summary.rmse_std, 0.0);
  EXPECT_EQ(r.summary.nlpd_std, 0.0);
  EXPECT_TRUE(std::isfinite(r.summary.rmse_mean));
}

TEST(Experiment, EverySolverRuns) {
  for (const char* name : {"gp-mle", "bmap", "ssmap", "ekfs", "ckfs", "pf", "pfbs"}) {
    auto c = base_config(name);
    c["trials"] = 1;
    c["data"]["size"] = 20;
    c["options"] = {{"particles", 200}, {"backward", 20}};
    const ExperimentResult r = run_experiment(parse_experiment_config(c));
    ASSERT_TRUE(r.trials[0].ok) << name << ": " << r.trials[0].message;
    EXPECT_LT(r.summary.rmse_mean, 0.5) << name;
    const bool map = std::string(name) == "bmap" || std::string(name) == "ssmap";
    EXPECT_EQ(std::isnan(r.summary.nlpd_mean), map) << name;
  }
}

TEST(Experiment, ByteIdenticalOutput) {
  for (const char* format : {"csv", "json"}) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      auto c = base_config("pf");
      c["options"] = {{"particles", 100}};
      c["output"] = {{"path", temp_path(std::string("det.") + format)}, {"format", format}};
      const ExperimentConfig config = parse_experiment_config(c);
      emit_results(run_experiment(config), config);
      const std::string text = slurp(config.output_path);
      EXPECT_FALSE(text.empty());
      EXPECT_TRUE(std::filesystem::exists(config.output_path + ".timing.csv"));
      if (rep == 0) first = text;
      else EXPECT_EQ(text, first) << format;
    }
  }
}

TEST(Experiment, CsvLayout) {
  const ExperimentConfig config = parse_experiment_config(base_config("ekfs"));
  std::ostringstream os;
  write_results_csv(run_experiment(config), os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("trial,seed,status,rmse,nlpd,message\n0,", 0), 0u);
  EXPECT_NE(s.find("\nmean,,3 ok / 0 failed,"), std::string::npos);
  EXPECT_NE(s.find("\nstd,,,"), std::string::npos);
}

TEST(GridSearch, SingleCellAndTieBreak) {
  auto c = base_config("ckfs");
  c["trials"] = 1;
  const ExperimentConfig config = parse_experiment_config(c);
  const GridResult one = grid_search(config, parse_grid_spec(nlohmann::json::parse(
                                                  R"({"lengthscale": [0.05], "magnitude": [0.8]})")));
  ASSERT_EQ(one.cells.size(), 1u);
  EXPECT_EQ(one.best, 0u);
  EXPECT_EQ(one.cells[0].lengthscale, 0.05);
  EXPECT_EQ(one.cells[0].score, one.cells[0].summary.rmse_mean);

  // duplicated cells score identically and the first of them is kept
  const GridResult dup = grid_search(config, parse_grid_spec(nlohmann::json::parse(
                                                 R"({"lengthscale": [0.2, 0.1, 0.1], "magnitude": [1.0, 1.0]})")));
  ASSERT_EQ(dup.cells.size(), 6u);
  EXPECT_EQ(dup.cells[2].score, dup.cells[5].score);
  EXPECT_TRUE(dup.best == 0 || dup.best == 2) << dup.best;
  for (const auto& cell : dup.cells) EXPECT_LE(dup.cells[dup.best].score, cell.score);

  EXPECT_THROW(parse_grid_spec(nlohmann::json::parse(R"({"lengthscale": [], "magnitude": [1]})")), ConfigError);
  EXPECT_THROW(parse_grid_spec(nlohmann::json::parse(R"({"lengthscale": [-1], "magnitude": [1]})")), ConfigError);
}

TEST(GridSearch, EqualScoresPreferSmallerHyperparameters) {
  // without measurements every cell has NLPD 0, so the ordering decides
  const std::string path = temp_path("unobserved.csv");
  {
    std::ofstream out(path);
    out << "0,nan\n0.5,nan\n1,nan\n";
  }
  auto c = base_config("ckfs");
  c["trials"] = 1;
  c["data"] = {{"signal", "file"}, {"path", path}};
  const ExperimentConfig config = parse_experiment_config(c);
  const GridResult r = grid_search(config, parse_grid_spec(nlohmann::json::parse(
                                                R"({"lengthscale": [0.3, 0.1], "magnitude": [2.0, 1.0]})")));
  ASSERT_EQ(r.cells.size(), 4u);
  const GridCell& best = r.cells[r.best];
  for (const auto& cell : r.cells) EXPECT_EQ(cell.score, best.score);
  EXPECT_EQ(best.lengthscale, 0.1);
  EXPECT_EQ(best.magnitude, 1.0);
}

TEST(GridSearch, DivergingCellLoses) {
  auto c = base_config("ckfs");
  c["trials"] = 1;
  const ExperimentConfig config = parse_experiment_config(c);
  const GridResult r = grid_search(config, parse_grid_spec(nlohmann::json::parse(
                                                R"({"lengthscale": [0.1], "magnitude": [1e300, 1.0]})")));
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells[0].summary.failures, 1);
  EXPECT_TRUE(std::isinf(r.cells[0].score));
  EXPECT_EQ(r.best, 1u);
  EXPECT_TRUE(std::isfinite(r.cells[1].score));
}

TEST(GridSearch, RectangleReferencePointEvaluates) {
  nlohmann::json c;
  c["model"] = nlohmann::json::parse(R"({
    "nodes": [
      {"layer": 1, "position": 1, "alpha": 1, "lengthscale": {"parent": [2, 1], "wrap": "exp"}, "magnitude": 1.0},
      {"layer": 2, "position": 1, "alpha": 0, "lengthscale": 1.0, "magnitude": 1.0}
    ]})");
  c["solver"] = "ckfs";
  c["data"] = {{"signal", "rectangle"}, {"size", 100}};
  const ExperimentConfig config = parse_experiment_config(c);
  const GridResult r = grid_search(config, parse_grid_spec(nlohmann::json::parse(
                                                R"({"lengthscale": [0.001], "magnitude": [1.54], "fixed_magnitude": [1.4142135623730951]})")));
  ASSERT_EQ(r.cells.size(), 1u);
  const Summary& s = r.cells[0].summary;
  EXPECT_EQ(s.successes + s.failures, 1);
  EXPECT_EQ(std::isfinite(r.cells[0].score), s.successes == 1);
  std::ostringstream os;
  write_grid_csv(r, os);
  EXPECT_NE(os.str().find("\n0.001,1.54,1.4142135623730951,"), std::string::npos);
}

TEST(GridSearch, HyperparametersReachLastLayer) {
  const DgpModel model = parse_model(nlohmann::json::parse(R"({
    "nodes": [
      {"layer": 1, "position": 1, "alpha": 1, "lengthscale": {"parent": [2, 1], "wrap": "exp"}, "magnitude": 0.5},
      {"layer": 2, "position": 1, "alpha": 0, "lengthscale": 1.0, "magnitude": 1.0}
    ]})"));
  const DgpModel tuned = with_hyperparameters(model, 0.2, 1.5, 0.7);
  EXPECT_EQ(tuned.nodes()[1].lengthscale.value, 0.2);
  EXPECT_EQ(tuned.nodes()[1].magnitude.value, 1.5);
  EXPECT_EQ(tuned.nodes()[0].magnitude.value, 0.7);
  EXPECT_TRUE(tuned.nodes()[0].lengthscale.parent.has_value());
  EXPECT_EQ(with_hyperparameters(model, 0.2, 1.5, std::nullopt).nodes()[0].magnitude.value, 0.5);
}

TEST(Ingest, RoundTrip) {
  const std::string path = temp_path("strain.csv");
  {
    std::ofstream out(path);
    out << "# strain sample\n";
    for (int i = 0; i < 10; ++i) out << format_double(0.1 * i) << ',' << format_double(1e-21 * i) << '\n';
  }
  const TimeSeriesData d = ingest_strain_csv(path, 0.5);
  ASSERT_EQ(d.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(d.times[i], 0.1 * i);
    EXPECT_EQ(d.y[i], 1e-21 * i);
    EXPECT_EQ(d.noise_var[i], 0.5);
  }
  std::ostringstream os;
  write_series_csv(d, os);
  const std::string copy = temp_path("strain_copy.csv");
  {
    std::ofstream out(copy);
    out << os.str();
  }
  const TimeSeriesData again = ingest_strain_csv(copy, 0.5);
  EXPECT_EQ(again.times, d.times);
  EXPECT_EQ(again.y, d.y);
  EXPECT_EQ(again.noise_var, d.noise_var);
}

TEST(Ingest, SampleRateAndInterpolationGrid) {
  const std::string path = temp_path("rate.csv");
  {
    std::ofstream out(path);
    out << "# rate=16384\n0.5\n-0.25\n";
  }
  const TimeSeriesData d = ingest_strain_csv(path);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.times[1], 1.0 / 16384.0);
  const TimeSeriesData grid = interpolation_grid(d, 1e-5);
  ASSERT_EQ(grid.size(), 8u);
  int missing = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) missing += grid.has_measurement(k) ? 0 : 1;
  EXPECT_EQ(missing, 6);
  EXPECT_EQ(grid.y.front(), 0.5);
  EXPECT_EQ(grid.y.back(), -0.25);
  EXPECT_NO_THROW(grid.validate());

  std::ostringstream os;
  write_series_csv(grid, os);
  EXPECT_NE(os.str().find(",nan,"), std::string::npos);
}

TEST(Ingest, Errors) {
  const std::string empty = temp_path("empty.csv");
  { std::ofstream out(empty); out << "# nothing\n"; }
  EXPECT_THROW(ingest_strain_csv(empty), ConfigError);
  const std::string bad = temp_path("bad.csv");
  { std::ofstream out(bad); out << "0,1\n0,2\n"; }
  EXPECT_THROW(ingest_strain_csv(bad), ConfigError);
  { std::ofstream out(bad); out << "0,abc\n"; }
  EXPECT_THROW(ingest_strain_csv(bad), ConfigError);
  EXPECT_THROW(ingest_strain_csv(temp_path("nonexistent.csv")), ConfigError);
  EXPECT_THROW(interpolation_grid(gen_rectangle(3, 0.1, 1), 0.0), ConfigError);
}
