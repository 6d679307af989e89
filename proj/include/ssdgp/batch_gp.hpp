#pragma once

// Batch Gaussian-process machinery: the non-stationary exponential covariance,
// Gram assembly with jitter escalation, closed-form regression and the
// stationary Matérn maximum-likelihood baseline.

#include "ssdgp/matern.hpp"
#include "ssdgp/optimize.hpp"

namespace ssdgp {

/// Non-stationary exponential covariance
///   C = sigma sigma' / (Gamma(1/2) 2^{-1/2}) (l l')^{1/4} sqrt(2) exp(-sqrt(2)|t - t'| / sqrt(l + l')) (l + l')^{-1/2}.
/// Its zero-lag value is sqrt(2/pi) sigma^2, not sigma^2.
double ns_matern_covariance(double t, double t2, double ell, double ell2, double sigma, double sigma2);

/// Partial derivatives of ns_matern_covariance with respect to (ell, sigma) of the first argument.
struct NsCovarianceGrad {
  double value;
  double d_ell;
  double d_sigma;
};
NsCovarianceGrad ns_matern_covariance_grad(double t, double t2, double ell, double ell2, double sigma, double sigma2);

/// Wrapped lengthscale and magnitude values at each time point.
struct NsCovarianceInputs {
  std::vector<double> times;
  Vector ell;
  Vector sigma;
};

Matrix ns_gram(const NsCovarianceInputs& in);
Matrix matern_gram(const std::vector<double>& times, const MaternSpec& spec);
Matrix matern_cross_gram(const std::vector<double>& query, const std::vector<double>& times, const MaternSpec& spec);

struct JitteredGram {
  Matrix k;                // with jitter on the diagonal
  double jitter = 0.0;     // absolute jitter added
  double relative = 0.0;   // jitter / mean diagonal
  Eigen::LLT<Matrix> llt;
};

/// Adds relative_jitter * mean-diagonal, escalating x10 up to 1e-4 until the
/// Cholesky factorization succeeds.
/// Errors: NumericalError("covariance not PD (increase jitter)").
JitteredGram build_gram(const Matrix& k, double relative_jitter = 1e-8);

struct GpPosterior {
  Vector mean;
  Vector var;
};

/// Conditional Gaussian at query points given y = f + noise with diagonal noise r_diag.
/// cross is query x data, prior_var the query prior variances.
/// Errors: NumericalError when gram + diag(r) cannot be factorized.
GpPosterior gp_regress(const Matrix& gram, const Vector& r_diag, const Vector& y, const Matrix& cross,
                       const Vector& prior_var);

/// -log N(y | 0, gram + diag(r)).
double gp_negative_log_marginal(const Matrix& gram, const Vector& r_diag, const Vector& y);

struct GpMleResult {
  MaternSpec spec;
  double negative_log_marginal = 0.0;
  GpPosterior posterior;  // at the data points
  OptimizeResult optimization;
};

/// Stationary Matérn GP with known noise variances; lengthscale and magnitude
/// fitted by L-BFGS on their logarithms.
GpMleResult fit_matern_gp(const TimeSeriesData& data, int alpha, const MaternSpec& initial,
                          const OptimizeOptions& options = {});

}  // namespace ssdgp
