#pragma once

// Maximum a posteriori estimation of DGP latents.
//
// Batch form: every node is an N-vector of values at the data times with a
// non-stationary exponential Gram matrix built from its parents' wrapped values.
// Latents are stored node-major: node i occupies entries [i N, (i + 1) N).
//
// State-space form: the trajectory U_{0:N} of the joint SDE state under the
// Gaussian transition approximation. U_k occupies entries [k d, (k + 1) d).

#include "ssdgp/discretize.hpp"
#include "ssdgp/optimize.hpp"

namespace ssdgp {

struct BatchMapProblem {
  DgpModel model;
  TimeSeriesData data;
  double relative_jitter = 1e-8;

  int num_variables() const { return model.num_nodes() * static_cast<int>(data.size()); }
};

/// Negative log unnormalized posterior: data term, top-node GP term and one
/// GP term per hyperparameter node, Gaussian normalizers included.
/// Errors: NumericalError("covariance not PD (increase jitter)").
double batch_map_loss(const BatchMapProblem& problem, const Vector& latents);
Vector batch_map_gradient(const BatchMapProblem& problem, const Vector& latents);
/// Loss with the gradient written to grad when it is non-null.
double batch_map_objective(const BatchMapProblem& problem, const Vector& latents, Vector* grad);

class SsMapProblem {
 public:
  /// initial defaults to the model's stationary prior, initial_time to default_initial_time(data).
  SsMapProblem(const TransitionCache& transitions, TimeSeriesData data, std::optional<GaussianBelief> initial = {},
               std::optional<double> initial_time = {});

  const TransitionCache& transitions() const { return *transitions_; }
  const TimeSeriesData& data() const { return data_; }
  const GaussianBelief& initial() const { return initial_; }
  double initial_time() const { return initial_time_; }
  int state_dim() const { return transitions_->model().state_dim(); }
  int num_variables() const { return state_dim() * static_cast<int>(data_.size() + 1); }

 private:
  const TransitionCache* transitions_;
  TimeSeriesData data_;
  GaussianBelief initial_;
  double initial_time_;
};

/// Measurement terms, transition terms and the initial-state term.
/// Errors: StepError when Q(U_{k-1}) cannot be factorized; NumericalError for a singular P0.
double ss_map_loss(const SsMapProblem& problem, const Vector& trajectory);
Vector ss_map_gradient(const SsMapProblem& problem, const Vector& trajectory);
double ss_map_objective(const SsMapProblem& problem, const Vector& trajectory, Vector* grad);

struct MapSolution {
  /// Estimate of the observed node at the data times.
  Vector f;
  /// Batch: N x nodes. State-space: (N + 1) x state_dim, row 0 is U_0.
  Matrix latents;
  OptimizeResult optimization;
};

/// Both start from all-zero latents.
MapSolution solve_batch_map(const BatchMapProblem& problem, const OptimizeOptions& options = {});
MapSolution solve_ss_map(const SsMapProblem& problem, const OptimizeOptions& options = {});

}  // namespace ssdgp
