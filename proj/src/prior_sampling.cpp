#include "ssdgp/prior_sampling.hpp"

#include <random>
#include <sstream>

namespace ssdgp {

Vector sample_gaussian(const Vector& mean, const Matrix& cov, const Vector& standard_normals) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return mean + llt.matrixL() * standard_normals;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + eig.eigenvectors() * root.asDiagonal() * standard_normals;
}

PriorSample sample_prior(const DgpModel& model, const std::vector<double>& times, int substeps, std::uint64_t seed,
                         const Scheme& scheme, const std::optional<Vector>& initial_state) {
  if (times.empty()) throw ConfigError("prior sampling needs a non-empty time grid");
  if (substeps < 1) throw ConfigError("prior sampling needs at least one step per interval");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw ConfigError("prior sampling grid must be strictly increasing");
  }
  const int n = model.state_dim();
  if (initial_state && initial_state->size() != n) throw ConfigError("initial state has the wrong dimension");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&]() {
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
    return z;
  };

  TransitionCache transitions(model, scheme);
  PriorSample out;
  out.times = times;
  out.states.resize(static_cast<Eigen::Index>(times.size()), n);
  out.node_paths.resize(static_cast<Eigen::Index>(times.size()), model.num_nodes());

  Vector x;
  if (initial_state) {
    x = *initial_state;
  } else {
    const GaussianBelief p0 = model.initial_condition();
    x = sample_gaussian(p0.mean, p0.cov, draw());
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) {
      const double h = (times[k] - times[k - 1]) / substeps;
      const DiscretizedTransition& tr = transitions.at(h);
      for (int s = 0; s < substeps; ++s) {
        const TransitionMoments mo = tr.moments(x);
        x = sample_gaussian(mo.mean, mo.cov, draw());
        if (!x.allFinite()) {
          std::ostringstream msg;
          msg.precision(10);
          msg << "prior sample blew up at t = " << times[k - 1] + (s + 1) * h;
          throw NumericalError(msg.str());
        }
      }
    }
    out.states.row(static_cast<Eigen::Index>(k)) = x.transpose();
    for (int node = 0; node < model.num_nodes(); ++node) {
      out.node_paths(static_cast<Eigen::Index>(k), node) = x(model.block_offset(node));
    }
  }
  return out;
}

}  // namespace ssdgp
