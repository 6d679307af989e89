#include "ssdgp/dgp_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace ssdgp {

WrapValue wrap(const Wrapping& w, double u) {
  switch (w.kind) {
    case WrapKind::Exp: {
      if (u > kExpClamp) return {std::exp(kExpClamp), 0.0, 0.0};
      if (u < -kExpClamp) return {std::exp(-kExpClamp), 0.0, 0.0};
      const double e = std::exp(u);
      return {e, e, e};
    }
    case WrapKind::SquarePlusC:
      return {u * u + w.c, 2.0 * u, 2.0};
    case WrapKind::InverseSquarePlusC: {
      const double s = u * u + w.c;
      return {1.0 / s, -2.0 * u / (s * s), (6.0 * u * u - 2.0 * w.c) / (s * s * s)};
    }
  }
  return {0.0, 0.0, 0.0};
}

Taylor wrap(const Wrapping& w, const Taylor& u) {
  switch (w.kind) {
    case WrapKind::Exp:
      if (std::abs(u.value()) > kExpClamp) return Taylor(u.space(), wrap(w, u.value()).value);
      return exp(u);
    case WrapKind::SquarePlusC: {
      Taylor out = u * u;
      return out += Taylor(u.space(), w.c);
    }
    case WrapKind::InverseSquarePlusC: {
      Taylor s = u * u;
      s += Taylor(u.space(), w.c);
      return reciprocal(s);
    }
  }
  return Taylor(u.space(), 0.0);
}

std::string NodeId::str() const { return "(" + std::to_string(layer) + "," + std::to_string(position) + ")"; }

int DgpModel::find(const NodeId& id) const {
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (nodes_[n].id == id) return static_cast<int>(n);
  }
  return -1;
}

Eigen::RowVectorXd DgpModel::observation_row() const {
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(state_dim_);
  h(root_index()) = 1.0;
  return h;
}

bool DgpModel::is_linear() const {
  return std::all_of(lengthscale_parent_.begin(), lengthscale_parent_.end(), [](int p) { return p < 0; }) &&
         std::all_of(magnitude_parent_.begin(), magnitude_parent_.end(), [](int p) { return p < 0; });
}

LtiSde DgpModel::linear_sde() const {
  if (!is_linear()) throw ConfigError("model has state-dependent coefficients; no LTI representation");
  LtiSde sde;
  sde.drift = Matrix::Zero(state_dim_, state_dim_);
  sde.dispersion = Matrix::Zero(state_dim_, state_dim_);
  sde.observation = observation_row();
  std::vector<double> unit(state_dim_, 0.0);
  std::vector<double> drift;
  std::vector<double> gains;
  for (int j = 0; j < state_dim_; ++j) {
    unit[j] = 1.0;
    coefficients(unit, drift, gains);
    for (int i = 0; i < state_dim_; ++i) sde.drift(i, j) = drift[i];
    unit[j] = 0.0;
  }
  for (int n = 0; n < num_nodes(); ++n) sde.dispersion(noise_index(n), noise_index(n)) = gains[n];
  return sde;
}

Vector DgpModel::joint_drift(const Vector& u) const {
  std::vector<double> x(u.data(), u.data() + u.size());
  std::vector<double> drift;
  std::vector<double> gains;
  coefficients(x, drift, gains);
  return Eigen::Map<const Vector>(drift.data(), state_dim_);
}

Matrix DgpModel::joint_dispersion(const Vector& u) const {
  std::vector<double> x(u.data(), u.data() + u.size());
  std::vector<double> drift;
  std::vector<double> gains;
  coefficients(x, drift, gains);
  Matrix beta = Matrix::Zero(state_dim_, state_dim_);
  for (int n = 0; n < num_nodes(); ++n) beta(noise_index(n), noise_index(n)) = gains[n];
  return beta;
}

GaussianBelief DgpModel::initial_condition() const {
  GaussianBelief belief{Vector::Zero(state_dim_), Matrix::Zero(state_dim_, state_dim_)};
  auto prior_value = [](const ParamSource& src) {
    return src.parent ? wrap(src.wrapping, 0.0).value : src.value;
  };
  for (int n = 0; n < num_nodes(); ++n) {
    const DgpNodeSpec& node = nodes_[n];
    const double magnitude = prior_value(node.magnitude);
    if (magnitude == 0.0) continue;
    const MaternSpec spec{node.alpha, prior_value(node.lengthscale), magnitude};
    const int d = block_dim(n);
    belief.cov.block(offsets_[n], offsets_[n], d, d) = solve_stationary_covariance(matern_sde_coefficients(spec));
  }
  return belief;
}

namespace {

void check_source(const ParamSource& src, const NodeId& id, const char* what, bool allow_zero) {
  if (src.parent) {
    const Wrapping& w = src.wrapping;
    if (w.kind != WrapKind::Exp && !(w.c > 0.0)) {
      throw ConfigError("node " + id.str() + ": " + what + " wrapping constant c must be positive");
    }
    return;
  }
  const bool ok = std::isfinite(src.value) && (allow_zero ? src.value >= 0.0 : src.value > 0.0);
  if (!ok) throw ConfigError("node " + id.str() + ": fixed " + what + " must be positive and finite");
}

}  // namespace

DgpModel build_dgp(std::vector<DgpNodeSpec> nodes) {
  if (nodes.empty()) throw ConfigError("invalid hierarchy: model has no nodes");
  DgpModel model;
  model.nodes_ = std::move(nodes);
  const auto& ns = model.nodes_;

  for (std::size_t a = 0; a < ns.size(); ++a) {
    const NodeId& id = ns[a].id;
    if (id.layer < 1 || id.position < 1) throw ConfigError("invalid hierarchy: bad node index " + id.str());
    if (ns[a].alpha < 0) throw ConfigError("node " + id.str() + ": alpha must be non-negative");
    for (std::size_t b = a + 1; b < ns.size(); ++b) {
      if (ns[b].id == id) throw ConfigError("duplicate node " + id.str());
    }
    check_source(ns[a].lengthscale, id, "lengthscale", false);
    // a zero magnitude gives a degenerate, noise-free node
    check_source(ns[a].magnitude, id, "magnitude", true);
  }

  int roots = 0;
  for (std::size_t n = 0; n < ns.size(); ++n) {
    if (ns[n].id.layer == 1) {
      ++roots;
      model.root_ = static_cast<int>(n);
    }
  }
  if (roots != 1 || !(ns[model.root_].id == NodeId{1, 1})) {
    throw ConfigError("invalid hierarchy: layer 1 must hold exactly the node (1,1)");
  }

  model.offsets_.resize(ns.size());
  int offset = 0;
  for (std::size_t n = 0; n < ns.size(); ++n) {
    model.offsets_[n] = offset;
    offset += ns[n].alpha + 1;
  }
  model.state_dim_ = offset;

  std::vector<int> child_links(ns.size(), 0);
  auto resolve = [&](const ParamSource& src, const DgpNodeSpec& child) {
    if (!src.parent) return -1;
    const int p = model.find(*src.parent);
    if (p < 0) throw ConfigError("invalid hierarchy: node " + child.id.str() + " links to missing node " + src.parent->str());
    if (ns[p].id.layer != child.id.layer + 1) {
      throw ConfigError("invalid hierarchy: node " + child.id.str() + " links across layers to " + src.parent->str());
    }
    ++child_links[p];
    return model.offsets_[p];
  };
  for (const auto& node : ns) {
    model.lengthscale_parent_.push_back(resolve(node.lengthscale, node));
    model.magnitude_parent_.push_back(resolve(node.magnitude, node));
  }
  for (std::size_t n = 0; n < ns.size(); ++n) {
    if (ns[n].id.layer == 1) continue;
    if (child_links[n] == 0) throw ConfigError("invalid hierarchy: node " + ns[n].id.str() + " has no child");
    if (child_links[n] > 1) throw ConfigError("invalid hierarchy: node " + ns[n].id.str() + " is shared");
  }
  return model;
}

namespace {

Wrapping parse_wrapping(const nlohmann::json& j) {
  Wrapping w;
  const std::string kind = j.value("wrap", std::string("exp"));
  if (kind == "exp") {
    w.kind = WrapKind::Exp;
  } else if (kind == "square_plus_c") {
    w.kind = WrapKind::SquarePlusC;
  } else if (kind == "inverse_square_plus_c") {
    w.kind = WrapKind::InverseSquarePlusC;
  } else {
    throw ConfigError("unknown wrapping '" + kind + "'");
  }
  if (w.kind != WrapKind::Exp) {
    if (!j.contains("c")) throw ConfigError("wrapping '" + kind + "' needs a constant c");
    w.c = j.at("c").get<double>();
  }
  return w;
}

ParamSource parse_source(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return ParamSource::fixed(j.get<double>());
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a number or an object");
  if (j.contains("parent")) {
    const auto& p = j.at("parent");
    if (!p.is_array() || p.size() != 2) throw ConfigError(std::string(what) + ": parent must be [layer, position]");
    return ParamSource::linked({p[0].get<int>(), p[1].get<int>()}, parse_wrapping(j));
  }
  if (j.contains("value")) return ParamSource::fixed(j.at("value").get<double>());
  throw ConfigError(std::string(what) + ": needs 'parent' or 'value'");
}

nlohmann::json source_to_json(const ParamSource& src) {
  if (!src.parent) return {{"value", src.value}};
  nlohmann::json j{{"parent", {src.parent->layer, src.parent->position}}};
  switch (src.wrapping.kind) {
    case WrapKind::Exp:
      j["wrap"] = "exp";
      break;
    case WrapKind::SquarePlusC:
      j["wrap"] = "square_plus_c";
      j["c"] = src.wrapping.c;
      break;
    case WrapKind::InverseSquarePlusC:
      j["wrap"] = "inverse_square_plus_c";
      j["c"] = src.wrapping.c;
      break;
  }
  return j;
}

}  // namespace

DgpModel parse_model(const nlohmann::json& doc) {
  try {
    const auto& arr = doc.at("nodes");
    if (!arr.is_array()) throw ConfigError("model: 'nodes' must be an array");
    std::vector<DgpNodeSpec> nodes;
    for (const auto& j : arr) {
      DgpNodeSpec node;
      node.id = {j.at("layer").get<int>(), j.at("position").get<int>()};
      node.alpha = j.value("alpha", 0);
      node.lengthscale = parse_source(j.at("lengthscale"), "lengthscale");
      node.magnitude = parse_source(j.at("magnitude"), "magnitude");
      nodes.push_back(node);
    }
    return build_dgp(std::move(nodes));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

DgpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("model file " + path + ": " + e.what());
  }
  return parse_model(doc);
}

nlohmann::json model_to_json(const DgpModel& model) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& node : model.nodes()) {
    arr.push_back({{"layer", node.id.layer},
                   {"position", node.id.position},
                   {"alpha", node.alpha},
                   {"lengthscale", source_to_json(node.lengthscale)},
                   {"magnitude", source_to_json(node.magnitude)}});
  }
  return {{"nodes", arr}};
}

}  // namespace ssdgp
