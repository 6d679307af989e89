#include "ssdgp/cov_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ssdgp {

namespace {

// expm1(x) / x, continuous at 0
double phi1(double x) { return std::abs(x) < 1e-12 ? 1.0 + 0.5 * x : std::expm1(x) / x; }

}  // namespace

void CovRecursionConfig::validate() const {
  if (!(mu < 0.0)) throw ConfigError("cov-analysis: mu must be negative");
  if (!(a < 0.0)) throw ConfigError("cov-analysis: a must be negative");
  if (!(b > 0.0)) throw ConfigError("cov-analysis: b must be positive");
  if (!(dt > 0.0)) throw ConfigError("cov-analysis: dt must be positive");
  if (p0_ff && !(*p0_ff >= 0.0)) throw ConfigError("cov-analysis: P0_ff must be non-negative");
  if (e0_usq && !(*e0_usq >= 0.0)) throw ConfigError("cov-analysis: E[u^2] must be non-negative");
  for (double r : r_schedule) {
    if (!(r >= 0.0)) throw ConfigError("cov-analysis: noise variances must be non-negative");
  }
}

PredictedMoments predict_moments(const CovRecursionConfig& c, double p_fs, double p_ff, double e_usq, double dt) {
  const double e_inf = c.stationary_usq();
  const double gap = e_usq - e_inf;
  PredictedMoments out;
  out.p_fs = p_fs * std::exp((c.mu + c.a) * dt);
  out.e_usq = e_inf + gap * std::exp(2.0 * c.a * dt);
  // P(dt) = P e^{2 mu dt} + int_0^dt e^{2 mu (dt - s)} (e_inf + gap e^{2 a s}) ds
  const double decay = std::exp(2.0 * c.mu * dt);
  out.p_ff = p_ff * decay + e_inf * dt * phi1(2.0 * c.mu * dt) + gap * dt * decay * phi1(2.0 * (c.a - c.mu) * dt);
  return out;
}

CovRecursion gf_covariance_recursion(const CovRecursionConfig& config) {
  config.validate();
  CovRecursion rec;
  double p_fs = config.p0_fs;
  double p_ff = config.p0_ff.value_or(config.stationary_ff());
  double e_usq = config.e0_usq.value_or(config.stationary_usq());
  for (double r : config.r_schedule) {
    const PredictedMoments pred = predict_moments(config, p_fs, p_ff, e_usq, config.dt);
    // infinite noise: prediction only
    const double m = std::isinf(r) ? 1.0 : (pred.p_ff + r > 0.0 ? r / (pred.p_ff + r) : 0.0);
    p_fs = r == 0.0 ? 0.0 : pred.p_fs * m;
    p_ff = r == 0.0 ? 0.0 : pred.p_ff * m;
    e_usq = pred.e_usq;
    rec.pred_fs.push_back(pred.p_fs);
    rec.pred_ff.push_back(pred.p_ff);
    rec.post_fs.push_back(p_fs);
    rec.post_ff.push_back(p_ff);
    rec.e_usq.push_back(e_usq);
    rec.m.push_back(m);
  }
  return rec;
}

CovBound covariance_bound(const CovRecursion& rec, double p0_fs, double threshold) {
  CovBound out;
  double prod = std::abs(p0_fs);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    prod *= rec.m[k];
    out.bound.push_back(prod);
    const double v = std::abs(rec.post_fs[k]);
    if (v > prod) out.holds = false;
    if (out.crossing_step < 0 && v < threshold) out.crossing_step = static_cast<int>(k + 1);
  }
  return out;
}

double variance_floor(const VarianceFloorInputs& in) {
  if (!(in.c > 0.0) || !(in.c_theta > 0.0) || !(in.dt > 0.0) || !(in.zeta > 0.0)) {
    throw ConfigError("variance floor: C, C_theta, zeta and dt must be positive");
  }
  const double root = std::sqrt(in.c);
  if (!(in.epsilon > 0.0) || !(in.epsilon < in.c_theta / (2.0 * root))) {
    throw ConfigError("variance floor: epsilon must lie in (0, C_theta / (2 sqrt(C)))");
  }
  return (in.c_theta - 2.0 * in.epsilon * root) * in.dt / std::exp(2.0 * in.zeta * in.dt * root);
}

VarianceFloorInputs variance_floor_inputs(const CovRecursionConfig& config) {
  config.validate();
  const double e0 = config.e0_usq.value_or(config.stationary_usq());
  const double e_min = std::min(e0, config.stationary_usq());
  const double e_max = std::max(e0, config.stationary_usq());
  // var f never exceeds the larger of its start and the equilibrium of the largest forcing
  const double p_max = std::max(config.p0_ff.value_or(config.stationary_ff()), e_max / (-2.0 * config.mu));
  VarianceFloorInputs in;
  in.c = config.mu * config.mu * p_max;
  in.c_theta = e_min;
  in.epsilon = 0.25 * in.c_theta / std::sqrt(in.c);
  in.zeta = 1.0 / (4.0 * in.epsilon);
  in.dt = config.dt;
  return in;
}

void write_recursion_csv(const CovRecursion& rec, const CovBound& bound, std::ostream& out) {
  out << "k,pred_ff,pred_fs,post_fs,M,bound\n";
  char line[256];
  for (std::size_t k = 0; k < rec.size(); ++k) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", k + 1, rec.pred_ff[k], rec.pred_fs[k],
                  rec.post_fs[k], rec.m[k], bound.bound[k]);
    out << line;
  }
}

}  // namespace ssdgp
