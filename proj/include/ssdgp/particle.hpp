#pragma once

// Bootstrap particle filter with adaptive systematic resampling and the
// backward-simulation particle smoother.
//
// Random numbers come from counter-based streams keyed by (seed, step, particle),
// so results do not depend on the number of threads.

#include "ssdgp/discretize.hpp"

#include <cstdint>
#include <optional>

namespace ssdgp {

struct ParticleCloud {
  Matrix particles;     // Np x state_dim
  Vector log_weights;   // normalized: logsumexp(log_weights) = 0
  double ess = 0.0;

  Vector mean() const;
};

struct ParticleOptions {
  int particles = 1000;
  std::uint64_t seed = 0;
  std::optional<GaussianBelief> initial;
  std::optional<double> initial_time;
};

struct ParticleFilterOutput {
  double initial_time = 0.0;
  ParticleCloud initial;
  std::vector<double> times;
  /// Weighted clouds after the step-k measurement, before any resampling.
  std::vector<ParticleCloud> clouds;
  /// log p(y_k | y_{1:k-1}) estimates; NaN at prediction-only steps.
  std::vector<double> log_pred;
  double log_likelihood = 0.0;
  int resample_count = 0;

  std::size_t size() const { return clouds.size(); }
};

/// Errors: ConfigError for fewer than 2 particles, StepError("particle degeneracy", k)
/// when every particle has zero likelihood.
ParticleFilterOutput bootstrap_pf(const TransitionCache& transitions, const TimeSeriesData& data,
                                  const ParticleOptions& options);

/// Systematic resampling with offset u in [0, 1): index i appears
/// floor(Np w_i) or ceil(Np w_i) times.
std::vector<int> systematic_resample(const Vector& log_weights, double u);
/// Same, with the offset drawn from seed.
std::vector<int> systematic_resample(const Vector& log_weights, std::uint64_t seed);

double effective_sample_size(const Vector& normalized_log_weights);
/// Shifts log_weights so that they exponentiate to a probability vector; returns the log normalizer.
double normalize_log_weights(Vector& log_weights);

struct BackwardSimulationOutput {
  /// trajectories[j] is N x state_dim.
  std::vector<Matrix> trajectories;

  /// Average over trajectories, N x state_dim.
  Matrix mean() const;
};

/// Errors: StepError("backward degeneracy", k).
BackwardSimulationOutput backward_simulation_smoother(const TransitionCache& transitions,
                                                      const ParticleFilterOutput& filtered, int trajectories,
                                                      std::uint64_t seed);

}  // namespace ssdgp
