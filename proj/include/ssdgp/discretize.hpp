#pragma once

// Gaussian approximations U_{k+1} ~ N(a(U_k), Q(U_k)) of the transition density.
//
// TME of order M:
//   a(U) = sum_{r=0}^{M} dt^r / r! A^r[id](U)
//   Q(U) = sum_{r=1}^{M} dt^r / r! Phi_r(U)
// with A the generator of the joint SDE and Phi_r the r-th time derivative of the
// transition covariance at dt = 0. Order 1 coincides with Euler-Maruyama.
// "exact" is only available for models with constant coefficients.

#include "ssdgp/dgp_model.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace ssdgp {

enum class SchemeKind { EulerMaruyama, Tme, Exact };

struct Scheme {
  SchemeKind kind = SchemeKind::Tme;
  int order = 3;

  /// "em", "tme-1", "tme-2", "tme-3" or "exact".
  static Scheme parse(const std::string& name);
  std::string name() const;
};

struct TransitionMoments {
  Vector mean;
  Matrix cov;
  Matrix mean_jacobian;              // d a / dU, filled when derivatives are requested
  std::vector<Matrix> cov_gradient;  // d Q / dU_v for each state component v
  bool repaired = false;
  bool indefinite = false;
};

struct RepairReport {
  bool clipped = false;
  bool indefinite = false;
  double max_shift = 0.0;
};

/// Symmetrizes q and clips eigenvalues below 1e-12 * trace to that floor.
/// indefinite is set when an eigenvalue was below -1e-9 * trace.
RepairReport repair_covariance(Matrix& q);

class DiscretizedTransition {
 public:
  DiscretizedTransition(DgpModel model, Scheme scheme, double dt);

  double dt() const { return dt_; }
  const Scheme& scheme() const { return scheme_; }
  const DgpModel& model() const { return model_; }
  /// True when a(U) is linear and Q constant.
  bool is_linear() const { return linear_; }

  TransitionMoments moments(const Vector& u, bool derivatives = false, bool repair = true) const;
  Vector mean(const Vector& u) const { return moments(u).mean; }
  Matrix cov(const Vector& u) const { return moments(u).cov; }

 private:
  TransitionMoments tme_moments(const Vector& u, int order, bool derivatives) const;

  DgpModel model_;
  Scheme scheme_;
  double dt_;
  bool linear_ = false;
  Matrix transition_matrix_;  // exact scheme
  Matrix noise_cov_;
};

DiscretizedTransition euler_maruyama(const DgpModel& model, double dt);
/// Errors: ConfigError for order outside [1, 3].
DiscretizedTransition tme(const DgpModel& model, double dt, int order);
/// Exact discretization of a constant-coefficient model (Van Loan).
DiscretizedTransition exact_lti(const DgpModel& model, double dt);
DiscretizedTransition make_transition(const DgpModel& model, const Scheme& scheme, double dt);

/// Transitions keyed by step length (rounded to 1e-12); safe for concurrent use.
class TransitionCache {
 public:
  TransitionCache(DgpModel model, Scheme scheme);
  const DiscretizedTransition& at(double dt) const;
  const DgpModel& model() const { return model_; }
  const Scheme& scheme() const { return scheme_; }

 private:
  DgpModel model_;
  Scheme scheme_;
  mutable std::mutex mutex_;
  mutable std::map<long long, std::unique_ptr<DiscretizedTransition>> cache_;
};

}  // namespace ssdgp
