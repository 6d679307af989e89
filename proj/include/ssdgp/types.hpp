#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssdgp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid input (bad model description, malformed config, wrong sizes).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure at a specific step of a sequential algorithm (filter, smoother, particle method).
class StepError : public NumericalError {
 public:
  StepError(const std::string& what, std::size_t step)
      : NumericalError(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Mean and covariance of the joint state at one time point.
struct GaussianBelief {
  Vector mean;
  Matrix cov;
};

/// Time series with per-point noise variances.
///
/// A non-finite measurement marks a prediction-only step: the filters propagate
/// through it without an update and metrics skip it.
struct TimeSeriesData {
  std::vector<double> times;
  std::vector<double> y;
  std::vector<double> noise_var;
  std::optional<std::vector<double>> truth;

  std::size_t size() const { return times.size(); }
  bool has_measurement(std::size_t k) const;
  /// Throws ConfigError unless lengths agree and times strictly increase.
  void validate() const;
};

/// Time of the initial state U_0: one grid step before the first time stamp.
double default_initial_time(const TimeSeriesData& data);

}  // namespace ssdgp
