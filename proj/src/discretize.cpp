#include "ssdgp/discretize.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace ssdgp {

Scheme Scheme::parse(const std::string& name) {
  if (name == "em") return {SchemeKind::EulerMaruyama, 1};
  if (name == "exact") return {SchemeKind::Exact, 0};
  if (name.rfind("tme-", 0) == 0) {
    const std::string tail = name.substr(4);
    if (tail == "1" || tail == "2" || tail == "3") return {SchemeKind::Tme, tail[0] - '0'};
    throw ConfigError("unsupported TME order '" + tail + "' (supported: 1, 2, 3)");
  }
  throw ConfigError("unknown discretization scheme '" + name + "'");
}

std::string Scheme::name() const {
  switch (kind) {
    case SchemeKind::EulerMaruyama:
      return "em";
    case SchemeKind::Exact:
      return "exact";
    case SchemeKind::Tme:
      return "tme-" + std::to_string(order);
  }
  return "?";
}

RepairReport repair_covariance(Matrix& q) {
  RepairReport report;
  q = 0.5 * (q + q.transpose()).eval();
  const double trace = q.trace();
  if (!(trace > 0.0)) return report;
  const double floor = 1e-12 * trace;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  const double smallest = eig.eigenvalues().minCoeff();
  if (smallest >= floor) return report;
  report.clipped = true;
  report.indefinite = smallest < -1e-9 * trace;
  report.max_shift = floor - smallest;
  const Vector clipped = eig.eigenvalues().cwiseMax(floor);
  q = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  q = 0.5 * (q + q.transpose()).eval();
  return report;
}

DiscretizedTransition::DiscretizedTransition(DgpModel model, Scheme scheme, double dt)
    : model_(std::move(model)), scheme_(scheme), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("transition step must be positive");
  if (scheme_.kind == SchemeKind::Tme && (scheme_.order < 1 || scheme_.order > 3)) {
    throw ConfigError("unsupported TME order " + std::to_string(scheme_.order));
  }
  if (scheme_.kind == SchemeKind::Exact) {
    if (!model_.is_linear()) throw ConfigError("exact discretization needs constant hyperparameters");
    const LtiSde sde = model_.linear_sde();
    const int d = sde.state_dim();
    // Van Loan: expm([[-A, LL^T], [0, A^T]] dt) = [[., M12], [0, M22]], F = M22^T, Q = F M12
    Matrix block = Matrix::Zero(2 * d, 2 * d);
    block.topLeftCorner(d, d) = -sde.drift;
    block.topRightCorner(d, d) = sde.dispersion * sde.dispersion.transpose();
    block.bottomRightCorner(d, d) = sde.drift.transpose();
    const Matrix e = (block * dt).exp();
    transition_matrix_ = e.bottomRightCorner(d, d).transpose();
    noise_cov_ = transition_matrix_ * e.topRightCorner(d, d);
    noise_cov_ = 0.5 * (noise_cov_ + noise_cov_.transpose()).eval();
  }
  linear_ = model_.is_linear();
}

TransitionMoments DiscretizedTransition::moments(const Vector& u, bool derivatives, bool repair) const {
  TransitionMoments out;
  if (scheme_.kind == SchemeKind::Exact) {
    out.mean = transition_matrix_ * u;
    out.cov = noise_cov_;
    if (derivatives) {
      out.mean_jacobian = transition_matrix_;
      out.cov_gradient.assign(u.size(), Matrix::Zero(u.size(), u.size()));
    }
  } else {
    const int order = scheme_.kind == SchemeKind::EulerMaruyama ? 1 : scheme_.order;
    out = tme_moments(u, order, derivatives);
  }
  if (repair) {
    const RepairReport report = repair_covariance(out.cov);
    out.repaired = report.clipped;
    out.indefinite = report.indefinite;
  }
  return out;
}

TransitionMoments DiscretizedTransition::tme_moments(const Vector& u, int order, bool derivatives) const {
  const int n = model_.state_dim();
  const int degree = 2 * (order - 1) + (derivatives ? 1 : 0);
  const TaylorSpace& space = taylor_space(n, degree);

  std::vector<Taylor> x;
  x.reserve(n);
  for (int v = 0; v < n; ++v) x.push_back(Taylor::variable(space, v, u(v)));

  std::vector<Taylor> drift;
  std::vector<Taylor> gains;
  model_.coefficients(x, drift, gains);

  const int nodes = model_.num_nodes();
  std::vector<int> rows(nodes);
  std::vector<Taylor> diffusion;  // b_s^2
  for (int s = 0; s < nodes; ++s) {
    rows[s] = model_.noise_index(s);
    diffusion.push_back(gains[s] * gains[s]);
  }

  auto generator = [&](const Taylor& phi) {
    Taylor out(space, 0.0);
    if (phi.is_constant()) return out;
    for (int v = 0; v < n; ++v) out.add_product(drift[v], phi.derivative(v));
    for (int s = 0; s < nodes; ++s) {
      Taylor second = phi.derivative(rows[s]).derivative(rows[s]);
      second *= 0.5;
      out.add_product(diffusion[s], second);
    }
    return out;
  };

  // m[r][i] = A^r[x_i]
  std::vector<std::vector<Taylor>> m(order + 1);
  m[0] = x;
  if (order >= 1) m[1] = drift;
  for (int r = 2; r <= order; ++r) {
    m[r].reserve(n);
    for (int i = 0; i < n; ++i) m[r].push_back(generator(m[r - 1][i]));
  }

  // dm[r][s][i] = d m[r][i] / d x_{rows[s]}
  std::vector<std::vector<std::vector<Taylor>>> dm(order);
  for (int r = 0; r < order; ++r) {
    dm[r].resize(nodes);
    for (int s = 0; s < nodes; ++s) {
      dm[r][s].reserve(n);
      for (int i = 0; i < n; ++i) dm[r][s].push_back(m[r][i].derivative(rows[s]));
    }
  }

  // Phi_1 = beta beta^T, Phi_{r+1} = A Phi_r + sum_s C(r, s) B(m_s, m_{r-s}),
  // B(phi, psi)_ij = sum_s b_s^2 d_s phi_i d_s psi_j.  Upper triangle only.
  auto index = [n](int i, int j) { return i * n + j; };
  std::vector<std::vector<Taylor>> phi(order + 1);
  phi[1].assign(n * n, Taylor(space, 0.0));
  for (int s = 0; s < nodes; ++s) phi[1][index(rows[s], rows[s])] = diffusion[s];
  for (int r = 1; r < order; ++r) {
    phi[r + 1].assign(n * n, Taylor(space, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Taylor acc = generator(phi[r][index(i, j)]);
        for (int s = 0; s < nodes; ++s) {
          Taylor cross(space, 0.0);
          for (int q = 0; q <= r; ++q) {
            Taylor term = dm[q][s][i] * dm[r - q][s][j];
            term *= binomial(r, q);
            cross += term;
          }
          acc.add_product(diffusion[s], cross);
        }
        phi[r + 1][index(i, j)] = acc;
      }
    }
  }

  TransitionMoments out;
  out.mean = Vector::Zero(n);
  out.cov = Matrix::Zero(n, n);
  if (derivatives) {
    out.mean_jacobian = Matrix::Zero(n, n);
    out.cov_gradient.assign(n, Matrix::Zero(n, n));
  }
  double weight = 1.0;
  for (int r = 0; r <= order; ++r) {
    if (r > 0) weight *= dt_ / r;
    for (int i = 0; i < n; ++i) {
      out.mean(i) += weight * m[r][i].value();
      if (derivatives) {
        for (int v = 0; v < n; ++v) out.mean_jacobian(i, v) += weight * m[r][i].gradient(v);
      }
    }
    if (r == 0) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const Taylor& p = phi[r][index(i, j)];
        out.cov(i, j) += weight * p.value();
        if (derivatives) {
          for (int v = 0; v < n; ++v) out.cov_gradient[v](i, j) += weight * p.gradient(v);
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      out.cov(i, j) = out.cov(j, i);
      if (derivatives) {
        for (int v = 0; v < n; ++v) out.cov_gradient[v](i, j) = out.cov_gradient[v](j, i);
      }
    }
  }
  return out;
}

DiscretizedTransition euler_maruyama(const DgpModel& model, double dt) {
  return DiscretizedTransition(model, {SchemeKind::EulerMaruyama, 1}, dt);
}

DiscretizedTransition tme(const DgpModel& model, double dt, int order) {
  if (order < 1 || order > 3) throw ConfigError("unsupported TME order " + std::to_string(order));
  return DiscretizedTransition(model, {SchemeKind::Tme, order}, dt);
}

DiscretizedTransition exact_lti(const DgpModel& model, double dt) {
  return DiscretizedTransition(model, {SchemeKind::Exact, 0}, dt);
}

DiscretizedTransition make_transition(const DgpModel& model, const Scheme& scheme, double dt) {
  return DiscretizedTransition(model, scheme, dt);
}

TransitionCache::TransitionCache(DgpModel model, Scheme scheme) : model_(std::move(model)), scheme_(scheme) {}

const DiscretizedTransition& TransitionCache::at(double dt) const {
  const long long key = std::llround(dt / 1e-12);
  std::lock_guard lock(mutex_);
  auto& slot = cache_[key];
  if (!slot) slot = std::make_unique<DiscretizedTransition>(model_, scheme_, dt);
  return *slot;
}

}  // namespace ssdgp
