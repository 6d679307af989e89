#pragma once

// Covariance recursion of a Gaussian filter on the two-state system
//   df = mu f dt + u dW_f,   du = a u dt + b dW_u,
// with f observed in noise. The cross-covariance cov[f, u] contracts by
// M_k = R_k / (Pbar_ff + R_k) at every update and tends to zero.

#include "ssdgp/types.hpp"

#include <ostream>

namespace ssdgp {

struct CovRecursionConfig {
  double mu = -1.0;
  double a = -1.0;
  double b = 1.0;
  double dt = 0.1;
  double p0_fs = 0.1;
  /// Default: stationary var f, -b^2 / (4 a mu).
  std::optional<double> p0_ff;
  /// Default: stationary E[u^2], -b^2 / (2 a).
  std::optional<double> e0_usq;
  /// Measurement noise variance for steps 1..K.
  std::vector<double> r_schedule;

  /// Errors: ConfigError unless mu < 0, a < 0, b > 0, dt > 0 and all R_k >= 0.
  void validate() const;
  double stationary_usq() const { return -b * b / (2.0 * a); }
  double stationary_ff() const { return stationary_usq() / (-2.0 * mu); }
};

struct PredictedMoments {
  double p_fs;
  double p_ff;
  double e_usq;
};

/// Exact prediction over dt: P_fs e^{(mu + a) dt} and the solutions of
///   dP_ff/dt = 2 mu P_ff + E[u^2],   dE[u^2]/dt = 2 a E[u^2] + b^2.
PredictedMoments predict_moments(const CovRecursionConfig& config, double p_fs, double p_ff, double e_usq, double dt);

struct CovRecursion {
  std::vector<double> pred_fs;  // Pbar_fs,k
  std::vector<double> pred_ff;  // Pbar_ff,k
  std::vector<double> post_fs;  // P_fs,k
  std::vector<double> post_ff;  // P_ff,k
  std::vector<double> e_usq;    // E[u^2] at t_k
  std::vector<double> m;        // M_k

  std::size_t size() const { return post_fs.size(); }
};

/// Alternates predict_moments with the update P_fs <- Pbar_fs R_k / (Pbar_ff + R_k).
/// var f is updated the same way; E[u^2] follows the prior.
CovRecursion gf_covariance_recursion(const CovRecursionConfig& config);

struct CovBound {
  std::vector<double> bound;  // |P0_fs| prod_{i <= k} M_i
  bool holds = true;          // |P_fs,k| <= bound_k for every k
  /// First step with |P_fs,k| below the threshold passed to covariance_bound, or -1.
  int crossing_step = -1;
};

CovBound covariance_bound(const CovRecursion& rec, double p0_fs, double threshold = 1e-4);

struct VarianceFloorInputs {
  double c;        // upper bound on E[(mu f)^2]
  double c_theta;  // lower bound on E[theta^2]
  double epsilon;
  double zeta;     // sqrt(P) <= epsilon + zeta P; 1 / (4 epsilon) always works
  double dt;
};

/// C_F = (C_theta - 2 eps sqrt(C)) dt / exp(2 zeta dt sqrt(C)).
/// Errors: ConfigError unless 0 < epsilon < C_theta / (2 sqrt(C)).
double variance_floor(const VarianceFloorInputs& in);

/// Bounds for the two-state system: C from the largest prior var f reachable from
/// P0_ff, C_theta from the smallest E[u^2], epsilon at half its admissible maximum.
VarianceFloorInputs variance_floor_inputs(const CovRecursionConfig& config);

/// CSV with header "k,pred_ff,pred_fs,post_fs,M,bound"; rows k = 1..K.
void write_recursion_csv(const CovRecursion& rec, const CovBound& bound, std::ostream& out);

}  // namespace ssdgp
