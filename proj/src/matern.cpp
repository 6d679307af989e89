#include "ssdgp/matern.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace ssdgp {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Polynomial part of the half-integer Matérn kernel, k(tau) = sigma^2 e^{-z} P(z), z = kappa tau.
// P(z) = p!/(2p)! sum_i (p+i)!/(i!(p-i)!) (2z)^(p-i); returns P and dP/dz.
std::pair<double, double> matern_polynomial(int p, double z) {
  const double scale = factorial(p) / factorial(2 * p);
  double value = 0.0;
  double slope = 0.0;
  for (int i = 0; i <= p; ++i) {
    const double coeff = factorial(p + i) / (factorial(i) * factorial(p - i));
    const int power = p - i;
    value += coeff * std::pow(2.0 * z, power);
    if (power > 0) slope += coeff * power * 2.0 * std::pow(2.0 * z, power - 1);
  }
  return {scale * value, scale * slope};
}

}  // namespace

double MaternSpec::kappa() const { return std::sqrt(2.0 * nu()) / lengthscale; }

void MaternSpec::validate() const {
  if (smoothness_alpha < 0) throw ConfigError("Matérn smoothness alpha must be non-negative");
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw ConfigError("Matérn lengthscale must be positive and finite");
  }
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
    throw ConfigError("Matérn magnitude must be positive and finite");
  }
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

double matern_dispersion_gain(int alpha, double kappa, double magnitude) {
  return magnitude * factorial(alpha) / std::sqrt(factorial(2 * alpha)) * std::pow(2.0 * kappa, alpha + 0.5);
}

LtiSde matern_sde_coefficients(const MaternSpec& spec) {
  spec.validate();
  const int alpha = spec.smoothness_alpha;
  const int d = alpha + 1;
  const double kappa = spec.kappa();

  LtiSde sde;
  sde.drift = Matrix::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) sde.drift(i, i + 1) = 1.0;
  for (int m = 0; m < d; ++m) sde.drift(d - 1, m) = -binomial(d, m) * std::pow(kappa, d - m);

  sde.dispersion = Matrix::Zero(d, 1);
  sde.dispersion(d - 1, 0) = matern_dispersion_gain(alpha, kappa, spec.magnitude);

  sde.observation = Eigen::RowVectorXd::Zero(d);
  sde.observation(0) = 1.0;
  return sde;
}

double spectral_abscissa(const Matrix& a) {
  Eigen::EigenSolver<Matrix> solver(a, false);
  return solver.eigenvalues().real().maxCoeff();
}

Matrix solve_stationary_covariance(const LtiSde& sde) {
  const Matrix& a = sde.drift;
  const int d = static_cast<int>(a.rows());
  if (!(spectral_abscissa(a) < 0.0)) {
    throw NumericalError("no stationary covariance: drift matrix is not Hurwitz");
  }
  const Matrix identity = Matrix::Identity(d, d);
  // vec(A P + P A^T) = (I (x) A + A (x) I) vec(P)
  const Matrix system = Eigen::kroneckerProduct(identity, a) + Eigen::kroneckerProduct(a, identity);
  const Matrix rhs_matrix = -(sde.dispersion * sde.dispersion.transpose());
  const Vector rhs = Eigen::Map<const Vector>(rhs_matrix.data(), d * d);
  const Vector solution = system.fullPivLu().solve(rhs);
  Matrix p = Eigen::Map<const Matrix>(solution.data(), d, d);
  return 0.5 * (p + p.transpose());
}

Matrix stationary_cross_covariance(const LtiSde& sde, const Matrix& stationary_cov, double t, double t2) {
  if (t < t2) return stationary_cov * expm((t2 - t) * sde.drift).transpose();
  return expm(-(t2 - t) * sde.drift) * stationary_cov;
}

double matern_covariance(const MaternSpec& spec, double t, double t2) {
  const double variance = spec.magnitude * spec.magnitude;
  const double z = spec.kappa() * std::abs(t - t2);
  if (z == 0.0) return variance;
  return variance * std::exp(-z) * matern_polynomial(spec.smoothness_alpha, z).first;
}

double matern_covariance_dloglengthscale(const MaternSpec& spec, double t, double t2) {
  const double variance = spec.magnitude * spec.magnitude;
  const double z = spec.kappa() * std::abs(t - t2);
  if (z == 0.0) return 0.0;
  const auto [poly, slope] = matern_polynomial(spec.smoothness_alpha, z);
  // dz/dlog(l) = -z
  return -z * variance * std::exp(-z) * (slope - poly);
}

Matrix expm(const Matrix& a) { return a.exp(); }

}  // namespace ssdgp
