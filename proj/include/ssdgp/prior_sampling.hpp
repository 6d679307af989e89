#pragma once

#include "ssdgp/discretize.hpp"

#include <cstdint>
#include <optional>

namespace ssdgp {

struct PriorSample {
  std::vector<double> times;
  Matrix states;      // times.size() x state_dim
  Matrix node_paths;  // times.size() x num_nodes, first component of each block
};

/// One joint prior path on the grid. Each grid interval is split into `substeps`
/// transition steps of the chosen scheme. The state at times[0] is drawn from the
/// model's initial condition unless given.
/// Errors: ConfigError on a bad grid, NumericalError("prior sample blew up at t = ...").
PriorSample sample_prior(const DgpModel& model, const std::vector<double>& times, int substeps, std::uint64_t seed,
                         const Scheme& scheme = {}, const std::optional<Vector>& initial_state = std::nullopt);

/// Draws from N(mean, cov) for PSD cov; cov may be singular.
Vector sample_gaussian(const Vector& mean, const Matrix& cov, const Vector& standard_normals);

}  // namespace ssdgp
