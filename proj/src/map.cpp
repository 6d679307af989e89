#include "ssdgp/map.hpp"

#include "ssdgp/batch_gp.hpp"

#include <cmath>
#include <numbers>

namespace ssdgp {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Wrapped parameter values of one node at every data time, with derivatives
/// with respect to the parent latent (zero for fixed parameters).
struct ParamField {
  int parent = -1;
  Vector value;
  Vector derivative;
};

ParamField param_field(const DgpModel& model, const ParamSource& src, const Vector& latents, int n) {
  ParamField p;
  p.value.resize(n);
  p.derivative = Vector::Zero(n);
  if (!src.parent) {
    p.value.setConstant(src.value);
    return p;
  }
  p.parent = model.find(*src.parent);
  for (int m = 0; m < n; ++m) {
    const WrapValue w = wrap(src.wrapping, latents(p.parent * n + m));
    p.value(m) = w.value;
    p.derivative(m) = w.d1;
  }
  return p;
}

int root_node(const DgpModel& model) { return model.find(NodeId{1, 1}); }

}  // namespace

double batch_map_objective(const BatchMapProblem& problem, const Vector& latents, Vector* grad) {
  const DgpModel& model = problem.model;
  const TimeSeriesData& data = problem.data;
  const int n = static_cast<int>(data.size());
  if (latents.size() != problem.num_variables()) throw ConfigError("batch MAP: latent vector has the wrong length");
  if (grad) grad->setZero(latents.size());

  double loss = 0.0;
  const int root = root_node(model);
  for (int k = 0; k < n; ++k) {
    if (!data.has_measurement(k)) continue;
    const double r = data.noise_var[k];
    if (!(r > 0.0)) throw ConfigError("batch MAP needs positive noise variances");
    const double resid = data.y[k] - latents(root * n + k);
    loss += 0.5 * (resid * resid / r + std::log(r) + kLog2Pi);
    if (grad) (*grad)(root * n + k) -= resid / r;
  }

  for (int i = 0; i < model.num_nodes(); ++i) {
    const DgpNodeSpec& node = model.nodes()[i];
    const ParamField ell = param_field(model, node.lengthscale, latents, n);
    const ParamField sigma = param_field(model, node.magnitude, latents, n);
    const Matrix c = ns_gram({data.times, ell.value, sigma.value});
    const JitteredGram g = build_gram(c, problem.relative_jitter);
    const Vector u = latents.segment(i * n, n);
    const Vector tau = g.llt.solve(u);
    const double log_det = 2.0 * g.llt.matrixLLT().diagonal().array().log().sum();
    loss += 0.5 * (u.dot(tau) + log_det + n * kLog2Pi);
    if (!grad) continue;

    grad->segment(i * n, n) += tau;
    if (ell.parent < 0 && sigma.parent < 0) continue;
    // W = K^{-1} - tau tau^T; d loss / d u_m = 1/2 tr(W dK/du_m), with dK/du_m nonzero in row and column m only
    const Matrix w = g.llt.solve(Matrix::Identity(n, n)) - tau * tau.transpose();
    const double trace_w = w.trace();
    for (int m = 0; m < n; ++m) {
      double d_ell = 0.0;
      double d_sigma = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == m) continue;
        const NsCovarianceGrad cg = ns_matern_covariance_grad(data.times[m], data.times[j], ell.value(m),
                                                              ell.value(j), sigma.value(m), sigma.value(j));
        d_ell += 2.0 * w(m, j) * cg.d_ell;
        d_sigma += 2.0 * w(m, j) * cg.d_sigma;
      }
      // the diagonal does not depend on the lengthscale; the jitter scales with the mean diagonal
      const double dc_mm = 2.0 * c(m, m) / sigma.value(m);
      d_sigma += (w(m, m) + g.relative / n * trace_w) * dc_mm;
      if (ell.parent >= 0) (*grad)(ell.parent * n + m) += 0.5 * d_ell * ell.derivative(m);
      if (sigma.parent >= 0) (*grad)(sigma.parent * n + m) += 0.5 * d_sigma * sigma.derivative(m);
    }
  }
  return loss;
}

double batch_map_loss(const BatchMapProblem& problem, const Vector& latents) {
  return batch_map_objective(problem, latents, nullptr);
}

Vector batch_map_gradient(const BatchMapProblem& problem, const Vector& latents) {
  Vector g;
  batch_map_objective(problem, latents, &g);
  return g;
}

SsMapProblem::SsMapProblem(const TransitionCache& transitions, TimeSeriesData data,
                           std::optional<GaussianBelief> initial, std::optional<double> initial_time)
    : transitions_(&transitions), data_(std::move(data)) {
  data_.validate();
  initial_ = initial.value_or(transitions.model().initial_condition());
  // nodes with zero magnitude have a degenerate prior block
  repair_covariance(initial_.cov);
  initial_time_ = initial_time.value_or(default_initial_time(data_));
  if (!data_.times.empty() && !(initial_time_ < data_.times.front())) {
    throw ConfigError("initial time must precede the first time stamp");
  }
}

double ss_map_objective(const SsMapProblem& problem, const Vector& trajectory, Vector* grad) {
  const int d = problem.state_dim();
  const TimeSeriesData& data = problem.data();
  const std::size_t n = data.size();
  if (trajectory.size() != problem.num_variables()) throw ConfigError("SS-MAP: trajectory has the wrong length");
  if (grad) grad->setZero(trajectory.size());
  const int root = problem.transitions().model().root_index();

  // initial state
  Eigen::LLT<Matrix> p0(problem.initial().cov);
  if (p0.info() != Eigen::Success) throw NumericalError("SS-MAP: initial covariance not PD");
  const Vector e0 = trajectory.head(d) - problem.initial().mean;
  const Vector v0 = p0.solve(e0);
  double loss = 0.5 * (e0.dot(v0) + 2.0 * p0.matrixLLT().diagonal().array().log().sum() + d * kLog2Pi);
  if (grad) grad->head(d) += v0;

  double t_prev = problem.initial_time();
  for (std::size_t k = 1; k <= n; ++k) {
    const Eigen::Index prev = static_cast<Eigen::Index>((k - 1) * d);
    const Eigen::Index cur = static_cast<Eigen::Index>(k * d);
    const DiscretizedTransition& tr = problem.transitions().at(data.times[k - 1] - t_prev);
    t_prev = data.times[k - 1];
    const TransitionMoments mo = tr.moments(trajectory.segment(prev, d), grad != nullptr);
    Eigen::LLT<Matrix> q(mo.cov);
    if (q.info() != Eigen::Success || !(q.matrixLLT().diagonal().minCoeff() > 0.0)) {
      throw StepError("transition covariance not PD", k);
    }
    const Vector e = trajectory.segment(cur, d) - mo.mean;
    const Vector v = q.solve(e);
    loss += 0.5 * (e.dot(v) + 2.0 * q.matrixLLT().diagonal().array().log().sum() + d * kLog2Pi);
    if (grad) {
      grad->segment(cur, d) += v;
      Vector z(d);
      if (tr.is_linear()) {
        z.setZero();
      } else {
        const Matrix q_inv = q.solve(Matrix::Identity(d, d));
        for (int m = 0; m < d; ++m) {
          const Matrix& dq = mo.cov_gradient[m];
          z(m) = q_inv.cwiseProduct(dq).sum() - v.dot(dq * v);
        }
      }
      grad->segment(prev, d) += -mo.mean_jacobian.transpose() * v + 0.5 * z;
    }

    if (data.has_measurement(k - 1)) {
      const double r = data.noise_var[k - 1];
      if (!(r > 0.0)) throw ConfigError("SS-MAP needs positive noise variances");
      const double resid = data.y[k - 1] - trajectory(cur + root);
      loss += 0.5 * (resid * resid / r + std::log(r) + kLog2Pi);
      if (grad) (*grad)(cur + root) -= resid / r;
    }
  }
  return loss;
}

double ss_map_loss(const SsMapProblem& problem, const Vector& trajectory) {
  return ss_map_objective(problem, trajectory, nullptr);
}

Vector ss_map_gradient(const SsMapProblem& problem, const Vector& trajectory) {
  Vector g;
  ss_map_objective(problem, trajectory, &g);
  return g;
}

MapSolution solve_batch_map(const BatchMapProblem& problem, const OptimizeOptions& options) {
  problem.data.validate();
  const int n = static_cast<int>(problem.data.size());
  MapSolution out;
  out.optimization = optimize_lbfgs(
      [&](const Vector& x, Vector* g) { return batch_map_objective(problem, x, g); },
      Vector::Zero(problem.num_variables()), options);
  out.latents = Eigen::Map<const Matrix>(out.optimization.x.data(), n, problem.model.num_nodes());
  out.f = out.latents.col(root_node(problem.model));
  return out;
}

MapSolution solve_ss_map(const SsMapProblem& problem, const OptimizeOptions& options) {
  const int d = problem.state_dim();
  const int n = static_cast<int>(problem.data().size());
  MapSolution out;
  out.optimization = optimize_lbfgs(
      [&](const Vector& x, Vector* g) { return ss_map_objective(problem, x, g); },
      Vector::Zero(problem.num_variables()), options);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  out.latents = Eigen::Map<const RowMajor>(out.optimization.x.data(), n + 1, d);
  out.f = out.latents.col(problem.transitions().model().root_index()).tail(n);
  return out;
}

}  // namespace ssdgp
