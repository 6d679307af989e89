#pragma once

// Hierarchy of conditional Matérn nodes realized as one joint non-linear SDE
//   dU = Lambda(U) U dt + beta(U) dW.
// Each node owns a contiguous companion-form block; its lengthscale and
// magnitude are either constants or wrapped values of a parent node.

#include "ssdgp/matern.hpp"
#include "ssdgp/taylor.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace ssdgp {

enum class WrapKind { Exp, SquarePlusC, InverseSquarePlusC };

struct Wrapping {
  WrapKind kind = WrapKind::Exp;
  double c = 0.0;
};

struct WrapValue {
  double value;
  double d1;
  double d2;
};

/// Exp inputs are clamped to [-kExpClamp, kExpClamp]; derivatives vanish outside.
inline constexpr double kExpClamp = 40.0;

WrapValue wrap(const Wrapping& w, double u);
Taylor wrap(const Wrapping& w, const Taylor& u);

struct NodeId {
  int layer = 1;
  int position = 1;

  friend bool operator==(const NodeId&, const NodeId&) = default;
  std::string str() const;
};

/// Either a constant or g(parent node value).
struct ParamSource {
  std::optional<NodeId> parent;
  double value = 1.0;
  Wrapping wrapping;

  static ParamSource fixed(double v) { return {std::nullopt, v, {}}; }
  static ParamSource linked(NodeId p, Wrapping w = {}) { return {p, 0.0, w}; }
};

struct DgpNodeSpec {
  NodeId id;
  int alpha = 0;
  ParamSource lengthscale;
  ParamSource magnitude;
};

class DgpModel {
 public:
  const std::vector<DgpNodeSpec>& nodes() const { return nodes_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int state_dim() const { return state_dim_; }
  int block_offset(int node) const { return offsets_[node]; }
  int block_dim(int node) const { return nodes_[node].alpha + 1; }
  /// Index of the node's noise-driven (last) state component.
  int noise_index(int node) const { return offsets_[node] + nodes_[node].alpha; }
  int root_index() const { return offsets_[root_]; }
  int find(const NodeId& id) const;

  Eigen::RowVectorXd observation_row() const;
  /// True when every lengthscale and magnitude is a constant.
  bool is_linear() const;
  /// Joint LTI representation; throws ConfigError unless is_linear().
  LtiSde linear_sde() const;

  /// Lambda(U) U.
  Vector joint_drift(const Vector& u) const;
  /// beta(U) as a state_dim x state_dim matrix; column noise_index(n) carries node n.
  Matrix joint_dispersion(const Vector& u) const;
  /// Zero mean, block-diagonal stationary covariances at wrapped prior means.
  GaussianBelief initial_condition() const;

  /// Drift vector and per-node dispersion gains for any scalar type (double or Taylor).
  template <class T>
  void coefficients(const std::vector<T>& u, std::vector<T>& drift, std::vector<T>& gains) const;

 private:
  friend DgpModel build_dgp(std::vector<DgpNodeSpec> nodes);

  std::vector<DgpNodeSpec> nodes_;
  std::vector<int> offsets_;
  std::vector<int> lengthscale_parent_;  // state index or -1
  std::vector<int> magnitude_parent_;
  int state_dim_ = 0;
  int root_ = 0;
};

/// Validates the tree and builds the state layout.
/// Errors: ConfigError("duplicate node ..."), ConfigError("invalid hierarchy: ...").
DgpModel build_dgp(std::vector<DgpNodeSpec> nodes);

/// Model description:
///   {"nodes": [{"layer": 1, "position": 1, "alpha": 1,
///               "lengthscale": {"parent": [2, 1], "wrap": "exp"},
///               "magnitude": {"value": 1.0}}, ...]}
/// wrap is one of "exp", "square_plus_c", "inverse_square_plus_c" (the latter two take "c").
DgpModel parse_model(const nlohmann::json& doc);
DgpModel load_model(const std::string& path);
nlohmann::json model_to_json(const DgpModel& model);

// ---------------------------------------------------------------------------

namespace detail {

inline double power(double x, double p) { return std::pow(x, p); }
inline Taylor power(const Taylor& x, double p) { return pow(x, p); }
inline double wrap_any(const Wrapping& w, double u) { return wrap(w, u).value; }
inline Taylor wrap_any(const Wrapping& w, const Taylor& u) { return wrap(w, u); }

}  // namespace detail

template <class T>
void DgpModel::coefficients(const std::vector<T>& u, std::vector<T>& drift, std::vector<T>& gains) const {
  drift.assign(state_dim_, constant_like(u[0], 0.0));
  gains.assign(nodes_.size(), constant_like(u[0], 0.0));
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const DgpNodeSpec& node = nodes_[n];
    const int off = offsets_[n];
    const int alpha = node.alpha;
    const T ell = lengthscale_parent_[n] < 0 ? constant_like(u[0], node.lengthscale.value)
                                             : detail::wrap_any(node.lengthscale.wrapping, u[lengthscale_parent_[n]]);
    const T sigma = magnitude_parent_[n] < 0 ? constant_like(u[0], node.magnitude.value)
                                             : detail::wrap_any(node.magnitude.wrapping, u[magnitude_parent_[n]]);
    const T kappa = std::sqrt(2.0 * alpha + 1.0) * reciprocal(ell);

    for (int j = 0; j < alpha; ++j) drift[off + j] = u[off + j + 1];
    // last row: -sum_m C(d, m) kappa^(d - m) u_m with d = alpha + 1, Horner in kappa
    T acc = -binomial(alpha + 1, 0) * u[off];
    for (int m = 1; m <= alpha; ++m) acc = acc * kappa - binomial(alpha + 1, m) * u[off + m];
    drift[off + alpha] = acc * kappa;

    gains[n] = sigma * (std::tgamma(alpha + 1.0) / std::sqrt(std::tgamma(2.0 * alpha + 1.0))) *
               detail::power(2.0 * kappa, alpha + 0.5);
  }
}

}  // namespace ssdgp
