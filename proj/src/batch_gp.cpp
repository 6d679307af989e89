#include "ssdgp/batch_gp.hpp"

#include <cmath>
#include <numbers>

namespace ssdgp {

namespace {

// sqrt(2) / (Gamma(1/2) 2^{-1/2}) = 2 / sqrt(pi)
const double kNsScale = 2.0 / std::sqrt(std::numbers::pi);

}  // namespace

double ns_matern_covariance(double t, double t2, double ell, double ell2, double sigma, double sigma2) {
  const double sum = ell + ell2;
  return kNsScale * sigma * sigma2 * std::pow(ell * ell2, 0.25) / std::sqrt(sum) *
         std::exp(-std::sqrt(2.0) * std::abs(t - t2) / std::sqrt(sum));
}

NsCovarianceGrad ns_matern_covariance_grad(double t, double t2, double ell, double ell2, double sigma, double sigma2) {
  const double c = ns_matern_covariance(t, t2, ell, ell2, sigma, sigma2);
  const double sum = ell + ell2;
  const double tau = std::abs(t - t2);
  const double d_log_ell = 0.25 / ell - 0.5 / sum + std::sqrt(2.0) * tau * 0.5 * std::pow(sum, -1.5);
  return {c, c * d_log_ell, c / sigma};
}

Matrix ns_gram(const NsCovarianceInputs& in) {
  const int n = static_cast<int>(in.times.size());
  if (in.ell.size() != n || in.sigma.size() != n) throw ConfigError("ns_gram: input lengths differ");
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      k(i, j) = ns_matern_covariance(in.times[i], in.times[j], in.ell(i), in.ell(j), in.sigma(i), in.sigma(j));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Matrix matern_gram(const std::vector<double>& times, const MaternSpec& spec) {
  const int n = static_cast<int>(times.size());
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      k(i, j) = matern_covariance(spec, times[i], times[j]);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Matrix matern_cross_gram(const std::vector<double>& query, const std::vector<double>& times, const MaternSpec& spec) {
  Matrix k(query.size(), times.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    for (std::size_t j = 0; j < times.size(); ++j) k(i, j) = matern_covariance(spec, query[i], times[j]);
  }
  return k;
}

JitteredGram build_gram(const Matrix& k, double relative_jitter) {
  const int n = static_cast<int>(k.rows());
  const double mean_diag = n > 0 ? k.diagonal().mean() : 0.0;
  for (double rel = relative_jitter; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    JitteredGram g;
    g.relative = rel;
    g.jitter = rel * mean_diag;
    g.k = k;
    g.k.diagonal().array() += g.jitter;
    g.llt.compute(g.k);
    if (g.llt.info() == Eigen::Success && g.llt.matrixLLT().diagonal().minCoeff() > 0.0) return g;
  }
  throw NumericalError("covariance not PD (increase jitter)");
}

GpPosterior gp_regress(const Matrix& gram, const Vector& r_diag, const Vector& y, const Matrix& cross,
                       const Vector& prior_var) {
  Matrix a = gram;
  a.diagonal() += r_diag;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("gp regression: covariance factorization failed");
  GpPosterior out;
  out.mean = cross * llt.solve(y);
  const Matrix v = llt.matrixL().solve(cross.transpose());
  out.var = (prior_var - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  return out;
}

double gp_negative_log_marginal(const Matrix& gram, const Vector& r_diag, const Vector& y) {
  Matrix a = gram;
  a.diagonal() += r_diag;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("gp marginal likelihood: covariance factorization failed");
  const Vector w = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (w.squaredNorm() + log_det + y.size() * std::log(2.0 * std::numbers::pi));
}

GpMleResult fit_matern_gp(const TimeSeriesData& data, int alpha, const MaternSpec& initial,
                          const OptimizeOptions& options) {
  data.validate();
  std::vector<double> times;
  std::vector<double> ys;
  std::vector<double> rs;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!data.has_measurement(k)) continue;
    times.push_back(data.times[k]);
    ys.push_back(data.y[k]);
    rs.push_back(data.noise_var[k]);
  }
  const int n = static_cast<int>(times.size());
  if (n == 0) throw ConfigError("gp-mle needs at least one measurement");
  const Vector y = Eigen::Map<const Vector>(ys.data(), n);
  const Vector r = Eigen::Map<const Vector>(rs.data(), n);

  auto objective = [&](const Vector& theta, Vector* grad) {
    const MaternSpec spec{alpha, std::exp(theta(0)), std::exp(theta(1))};
    Matrix a = matern_gram(times, spec);
    a.diagonal() += r;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("gp-mle: covariance not PD");
    const Vector w = llt.solve(y);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double loss = 0.5 * (y.dot(w) + log_det + n * std::log(2.0 * std::numbers::pi));
    if (grad) {
      // d/dtheta = 1/2 tr((A^{-1} - w w^T) dA)
      const Matrix inner = llt.solve(Matrix::Identity(n, n)) - w * w.transpose();
      Matrix d_ell(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) d_ell(i, j) = matern_covariance_dloglengthscale(spec, times[i], times[j]);
      }
      const Matrix d_sigma = 2.0 * (a - Matrix(r.asDiagonal()));
      grad->resize(2);
      (*grad)(0) = 0.5 * (inner.cwiseProduct(d_ell)).sum();
      (*grad)(1) = 0.5 * (inner.cwiseProduct(d_sigma)).sum();
    }
    return loss;
  };

  Vector theta0(2);
  theta0 << std::log(initial.lengthscale), std::log(initial.magnitude);
  GpMleResult out;
  out.optimization = optimize_lbfgs(objective, theta0, options);
  out.spec = {alpha, std::exp(out.optimization.x(0)), std::exp(out.optimization.x(1))};
  out.negative_log_marginal = out.optimization.loss;

  const Matrix gram = matern_gram(times, out.spec);
  const Matrix all_cross = matern_cross_gram(data.times, times, out.spec);
  const Vector prior = Vector::Constant(static_cast<Eigen::Index>(data.size()), out.spec.magnitude * out.spec.magnitude);
  out.posterior = gp_regress(gram, r, y, all_cross, prior);
  return out;
}

}  // namespace ssdgp
