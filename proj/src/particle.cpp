#include "ssdgp/particle.hpp"

#include "ssdgp/prior_sampling.hpp"
#include "ssdgp/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

namespace ssdgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kResampleStream = 0xFFFFFFFFFFFFull;

Vector standard_normals(std::uint64_t seed, int n) {
  SplitMix64 engine(seed);
  std::normal_distribution<double> normal;
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = normal(engine);
  return z;
}

double uniform01(std::uint64_t seed) {
  SplitMix64 engine(seed);
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

/// Gaussian transition a(x), Q(x) prepared for sampling and density evaluation.
struct GaussianStep {
  Vector mean;
  Matrix lower;  // factor of Q
  double log_det = 0.0;
  bool full_rank = true;
};

GaussianStep prepare(const TransitionMoments& mo) {
  GaussianStep g;
  g.mean = mo.mean;
  Eigen::LLT<Matrix> llt(mo.cov);
  if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
    g.lower = llt.matrixL();
    g.log_det = 2.0 * g.lower.diagonal().array().log().sum();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(mo.cov);
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    g.lower = eig.eigenvectors() * root.asDiagonal();
    g.full_rank = false;
  }
  return g;
}

double log_density(const GaussianStep& g, const Vector& x) {
  if (!g.full_rank) return kNegInf;
  const Vector w = g.lower.triangularView<Eigen::Lower>().solve(x - g.mean);
  return -0.5 * (w.squaredNorm() + g.log_det + x.size() * std::log(2.0 * std::numbers::pi));
}

/// Moments for every particle; linear transitions share one factorization.
class StepModel {
 public:
  StepModel(const DiscretizedTransition& tr) : tr_(tr) {
    if (tr.is_linear()) {
      const int n = tr.model().state_dim();
      const TransitionMoments mo = tr.moments(Vector::Zero(n), true);
      jacobian_ = mo.mean_jacobian;
      shared_ = prepare(mo);
    }
  }

  GaussianStep at(const Vector& x) const {
    if (!tr_.is_linear()) return prepare(tr_.moments(x));
    GaussianStep g = *shared_;
    g.mean = *jacobian_ * x;
    return g;
  }

  Vector mean(const Vector& x) const { return jacobian_ ? Vector(*jacobian_ * x) : tr_.moments(x).mean; }
  bool linear() const { return shared_.has_value(); }
  const GaussianStep& shared() const { return *shared_; }

 private:
  const DiscretizedTransition& tr_;
  std::optional<Matrix> jacobian_;
  std::optional<GaussianStep> shared_;
};

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

Vector ParticleCloud::mean() const {
  const Vector w = log_weights.array().exp();
  return particles.transpose() * w;
}

double normalize_log_weights(Vector& log_weights) {
  const double norm = log_sum_exp(log_weights);
  if (std::isfinite(norm)) log_weights.array() -= norm;
  return norm;
}

double effective_sample_size(const Vector& normalized_log_weights) {
  return 1.0 / (2.0 * normalized_log_weights.array()).exp().sum();
}

std::vector<int> systematic_resample(const Vector& log_weights, double u) {
  const int n = static_cast<int>(log_weights.size());
  const double m = log_weights.maxCoeff();
  if (!std::isfinite(m)) throw NumericalError("systematic resampling needs a finite weight");
  Vector w = (log_weights.array() - m).exp();
  w /= w.sum();
  std::vector<int> out(n);
  double cumulative = w(0);
  int i = 0;
  for (int j = 0; j < n; ++j) {
    const double point = (j + u) / n;
    while (point > cumulative && i < n - 1) cumulative += w(++i);
    out[j] = i;
  }
  return out;
}

std::vector<int> systematic_resample(const Vector& log_weights, std::uint64_t seed) {
  return systematic_resample(log_weights, uniform01(stream_seed(seed, kResampleStream)));
}

ParticleFilterOutput bootstrap_pf(const TransitionCache& transitions, const TimeSeriesData& data,
                                  const ParticleOptions& options) {
  data.validate();
  if (options.particles < 2) throw ConfigError("particle filter needs at least 2 particles");
  const DgpModel& model = transitions.model();
  const int np = options.particles;
  const int dim = model.state_dim();
  const int root = model.root_index();

  ParticleFilterOutput out;
  out.initial_time = options.initial_time.value_or(default_initial_time(data));
  out.times = data.times;
  const GaussianBelief init = options.initial.value_or(model.initial_condition());

  ParticleCloud cloud;
  cloud.particles.resize(np, dim);
  {
    const GaussianStep g = prepare({init.mean, init.cov, {}, {}, false, false});
#pragma omp parallel for schedule(static)
    for (int i = 0; i < np; ++i) {
      const Vector z = standard_normals(stream_seed(options.seed, 0, i), dim);
      cloud.particles.row(i) = (g.mean + g.lower * z).transpose();
    }
  }
  cloud.log_weights = Vector::Constant(np, -std::log(static_cast<double>(np)));
  cloud.ess = np;
  out.initial = cloud;

  double t_prev = out.initial_time;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::size_t step = k + 1;
    const double dt = data.times[k] - t_prev;
    if (!(dt > 0.0)) throw ConfigError("initial time must precede the first time stamp");
    const StepModel stepper(transitions.at(dt));

    // resample the previous cloud when it has degenerated
    std::vector<int> parents(np);
    Vector prior_logw = cloud.log_weights;
    if (cloud.ess < 0.5 * np) {
      parents = systematic_resample(cloud.log_weights, uniform01(stream_seed(options.seed, step, kResampleStream)));
      prior_logw.setConstant(-std::log(static_cast<double>(np)));
      ++out.resample_count;
    } else {
      for (int i = 0; i < np; ++i) parents[i] = i;
    }

    Matrix next(np, dim);
    bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
    for (int i = 0; i < np; ++i) {
      const Vector x = cloud.particles.row(parents[i]).transpose();
      const Vector z = standard_normals(stream_seed(options.seed, step, i), dim);
      Vector x_new;
      if (stepper.linear()) {
        x_new = stepper.mean(x) + stepper.shared().lower * z;
      } else {
        const GaussianStep g = stepper.at(x);
        x_new = g.mean + g.lower * z;
      }
      finite = finite && x_new.allFinite();
      next.row(i) = x_new.transpose();
    }

    Vector logw = prior_logw;
    if (data.has_measurement(k)) {
      const double r = data.noise_var[k];
      const double y = data.y[k];
      for (int i = 0; i < np; ++i) {
        const double resid = y - next(i, root);
        const double ll = (r > 0.0 && std::isfinite(next(i, root)))
                              ? -0.5 * (std::log(2.0 * std::numbers::pi * r) + resid * resid / r)
                              : kNegInf;
        logw(i) += ll;
      }
      const double increment = normalize_log_weights(logw);
      if (!std::isfinite(increment)) throw StepError("particle degeneracy", step);
      out.log_pred.push_back(increment);
      out.log_likelihood += increment;
    } else {
      if (!finite) throw StepError("particle degeneracy", step);
      out.log_pred.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    cloud.particles = std::move(next);
    cloud.log_weights = std::move(logw);
    cloud.ess = effective_sample_size(cloud.log_weights);
    out.clouds.push_back(cloud);
    t_prev = data.times[k];
  }
  return out;
}

Matrix BackwardSimulationOutput::mean() const {
  if (trajectories.empty()) return Matrix();
  Matrix sum = Matrix::Zero(trajectories[0].rows(), trajectories[0].cols());
  for (const auto& t : trajectories) sum += t;
  return sum / static_cast<double>(trajectories.size());
}

BackwardSimulationOutput backward_simulation_smoother(const TransitionCache& transitions,
                                                      const ParticleFilterOutput& filtered, int count,
                                                      std::uint64_t seed) {
  if (count < 1) throw ConfigError("backward simulation needs at least one trajectory");
  const std::size_t n = filtered.size();
  BackwardSimulationOutput out;
  if (n == 0) return out;
  const int dim = static_cast<int>(filtered.clouds[0].particles.cols());
  const int np = static_cast<int>(filtered.clouds[0].particles.rows());
  out.trajectories.assign(count, Matrix(static_cast<Eigen::Index>(n), dim));

  // last step: draw from the final filtering cloud
  {
    const ParticleCloud& last = filtered.clouds[n - 1];
    const Vector w = last.log_weights.array().exp();
    for (int j = 0; j < count; ++j) {
      double u = uniform01(stream_seed(seed, n, j)), acc = 0.0;
      int pick = np - 1;
      for (int i = 0; i < np; ++i) {
        acc += w(i);
        if (u < acc) {
          pick = i;
          break;
        }
      }
      out.trajectories[j].row(static_cast<Eigen::Index>(n - 1)) = last.particles.row(pick);
    }
  }

  for (std::size_t k = n - 1; k-- > 0;) {
    const ParticleCloud& cloud = filtered.clouds[k];
    const double dt = filtered.times[k + 1] - filtered.times[k];
    const StepModel stepper(transitions.at(dt));
    std::vector<GaussianStep> steps(stepper.linear() ? 0 : np);
    Matrix means(np, dim);
    if (stepper.linear()) {
      for (int i = 0; i < np; ++i) means.row(i) = stepper.mean(cloud.particles.row(i).transpose()).transpose();
    } else {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < np; ++i) steps[i] = stepper.at(cloud.particles.row(i).transpose());
    }

    std::vector<int> chosen(count);
    bool degenerate = false;
#pragma omp parallel for schedule(static) reduction(|| : degenerate)
    for (int j = 0; j < count; ++j) {
      const Vector target = out.trajectories[j].row(static_cast<Eigen::Index>(k + 1)).transpose();
      Vector logw = cloud.log_weights;
      for (int i = 0; i < np; ++i) {
        if (!std::isfinite(logw(i))) continue;
        logw(i) += stepper.linear() ? log_density(stepper.shared(), target - means.row(i).transpose() +
                                                                      stepper.shared().mean)
                                    : log_density(steps[i], target);
      }
      const double norm = log_sum_exp(logw);
      if (!std::isfinite(norm)) {
        degenerate = true;
        continue;
      }
      const double u = uniform01(stream_seed(seed, k + 1, j));
      double acc = 0.0;
      int pick = np - 1;
      for (int i = 0; i < np; ++i) {
        acc += std::exp(logw(i) - norm);
        if (u < acc) {
          pick = i;
          break;
        }
      }
      chosen[j] = pick;
    }
    if (degenerate) throw StepError("backward degeneracy", k + 1);
    for (int j = 0; j < count; ++j) {
      out.trajectories[j].row(static_cast<Eigen::Index>(k)) = cloud.particles.row(chosen[j]);
    }
  }
  return out;
}

}  // namespace ssdgp
