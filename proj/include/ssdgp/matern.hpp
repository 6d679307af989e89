#pragma once

// Single-node Matérn machinery: covariance function, companion-form SDE,
// stationary covariance and lagged cross-covariance.

#include "ssdgp/types.hpp"

namespace ssdgp {

/// Matérn prior with half-integer smoothness nu = alpha + 1/2.
struct MaternSpec {
  int smoothness_alpha = 0;
  double lengthscale = 1.0;
  double magnitude = 1.0;

  double nu() const { return smoothness_alpha + 0.5; }
  double kappa() const;
  int state_dim() const { return smoothness_alpha + 1; }
  /// Throws ConfigError on alpha < 0, non-positive lengthscale or magnitude.
  void validate() const;
};

/// dx = A x dt + L dW, f = H x.
struct LtiSde {
  Matrix drift;       // A, d x d
  Matrix dispersion;  // L, d x S
  Eigen::RowVectorXd observation;  // H, 1 x d

  int state_dim() const { return static_cast<int>(drift.rows()); }
};

/// Binomial coefficient C(n, k) as a double.
double binomial(int n, int k);

/// Last entry of the Matérn dispersion vector, sigma * alpha! / sqrt((2 alpha)!) * (2 kappa)^(alpha + 1/2).
double matern_dispersion_gain(int alpha, double kappa, double magnitude);

LtiSde matern_sde_coefficients(const MaternSpec& spec);

/// Solves A P + P A^T + L L^T = 0. Throws NumericalError("no stationary covariance")
/// when A is not Hurwitz.
Matrix solve_stationary_covariance(const LtiSde& sde);

/// Cross-covariance cov[x(t), x(t2)] of the stationary process.
Matrix stationary_cross_covariance(const LtiSde& sde, const Matrix& stationary_cov, double t, double t2);

/// Matérn covariance via the half-integer closed form of the Bessel expression.
double matern_covariance(const MaternSpec& spec, double t, double t2);

/// Derivative of matern_covariance with respect to log(lengthscale) at lag |t - t2|.
double matern_covariance_dloglengthscale(const MaternSpec& spec, double t, double t2);

/// Matrix exponential (scaling and squaring with a Padé approximant).
Matrix expm(const Matrix& a);

/// Largest real part among the eigenvalues of a.
double spectral_abscissa(const Matrix& a);

}  // namespace ssdgp
