#pragma once

// Assumed-density Gaussian filters (extended and spherical-cubature) over the
// discretized joint SDE, and the RTS smoother driven by their stored
// cross-covariances.

#include "ssdgp/discretize.hpp"

#include <optional>

namespace ssdgp {

enum class GaussianFilterKind { Extended, Cubature };

struct FilterOptions {
  /// Belief of U_0; the model's initial condition when empty.
  std::optional<GaussianBelief> initial;
  /// Time of U_0; default_initial_time(data) when empty.
  std::optional<double> initial_time;
};

struct FilterOutput {
  double initial_time = 0.0;
  GaussianBelief initial;
  std::vector<double> times;
  std::vector<GaussianBelief> predicted;
  std::vector<GaussianBelief> filtered;
  /// cov[U_{k-1}, U_k] under the step-k prediction, k = 1..N.
  std::vector<Matrix> cross_cov;
  /// H m_pred and H P_pred H^T.
  std::vector<double> pred_f_mean;
  std::vector<double> pred_f_var;
  /// log N(y_k | H m_pred, H P_pred H^T + R_k); NaN at prediction-only steps.
  std::vector<double> log_pred;
  double log_likelihood = 0.0;
  /// Steps whose transition covariance was indefinite and had to be clipped.
  int indefinite_steps = 0;

  std::size_t size() const { return filtered.size(); }
};

struct SmootherOutput {
  GaussianBelief initial;
  std::vector<GaussianBelief> steps;
};

/// Joseph-form measurement update. Errors: NumericalError("degenerate innovation").
GaussianBelief kalman_update(const GaussianBelief& predicted, double y, const Eigen::RowVectorXd& h, double r);

/// Errors: StepError("filter diverged", k), StepError("degenerate innovation", k).
FilterOutput ekf_filter(const TransitionCache& transitions, const TimeSeriesData& data, const FilterOptions& options = {});
/// Errors: as ekf_filter plus StepError("filter numerical failure", k) when a covariance cannot be factorized.
FilterOutput ckf_filter(const TransitionCache& transitions, const TimeSeriesData& data, const FilterOptions& options = {});
FilterOutput gaussian_filter(GaussianFilterKind kind, const TransitionCache& transitions, const TimeSeriesData& data,
                             const FilterOptions& options = {});

SmootherOutput rts_smooth(const FilterOutput& filtered);

/// -sum_k log N(y_k | predictive mean, predictive variance + R_k) over measured steps.
double nlpd(const FilterOutput& filtered, const TimeSeriesData& data);

/// H m and H P H^T for each belief.
void observe(const std::vector<GaussianBelief>& beliefs, const Eigen::RowVectorXd& h, std::vector<double>& mean,
             std::vector<double>& var);

}  // namespace ssdgp
