#include "ssdgp/gaussian_filter.hpp"

#include <cmath>
#include <numbers>

namespace ssdgp {

namespace {

constexpr double kRegularization = 1e-12;

void symmetrize(Matrix& p) { p = 0.5 * (p + p.transpose()).eval(); }

bool all_finite(const GaussianBelief& b) { return b.mean.allFinite() && b.cov.allFinite(); }

double log_normal(double y, double mean, double var) {
  const double r = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + r * r / var);
}

struct Prediction {
  GaussianBelief belief;
  Matrix cross;
  bool indefinite = false;
};

Prediction predict_extended(const DiscretizedTransition& tr, const GaussianBelief& prev) {
  const TransitionMoments mo = tr.moments(prev.mean, true);
  Prediction out;
  out.belief.mean = mo.mean;
  out.belief.cov = mo.mean_jacobian * prev.cov * mo.mean_jacobian.transpose() + mo.cov;
  symmetrize(out.belief.cov);
  out.cross = prev.cov * mo.mean_jacobian.transpose();
  out.indefinite = mo.indefinite;
  return out;
}

/// Lower factor of p + eps * trace * I; empty optional on failure.
std::optional<Matrix> regularized_sqrt(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  const double trace = p.trace();
  if (trace == 0.0) return Matrix::Zero(n, n);
  if (!(trace > 0.0)) return std::nullopt;
  Eigen::LLT<Matrix> llt(p + kRegularization * trace * Matrix::Identity(n, n));
  if (llt.info() != Eigen::Success) return std::nullopt;
  return Matrix(llt.matrixL());
}

Prediction predict_cubature(const DiscretizedTransition& tr, const GaussianBelief& prev, std::size_t step) {
  const int n = static_cast<int>(prev.mean.size());
  const auto sqrt_p = regularized_sqrt(prev.cov);
  if (!sqrt_p) throw StepError("filter numerical failure", step);
  const double scale = std::sqrt(static_cast<double>(n));
  const double w = 1.0 / (2.0 * n);

  std::vector<Vector> points;
  std::vector<Vector> images;
  Matrix noise = Matrix::Zero(n, n);
  Prediction out;
  for (int i = 0; i < 2 * n; ++i) {
    const Vector offset = (i < n ? scale : -scale) * sqrt_p->col(i % n);
    Vector x = prev.mean + offset;
    TransitionMoments mo = tr.moments(x);
    out.indefinite = out.indefinite || mo.indefinite;
    noise += w * mo.cov;
    images.push_back(std::move(mo.mean));
    points.push_back(std::move(x));
  }
  Vector mean = Vector::Zero(n);
  for (const auto& a : images) mean += w * a;
  Matrix cov = noise;
  Matrix cross = Matrix::Zero(n, n);
  for (int i = 0; i < 2 * n; ++i) {
    const Vector da = images[i] - mean;
    cov += w * da * da.transpose();
    cross += w * (points[i] - prev.mean) * da.transpose();
  }
  symmetrize(cov);
  out.belief = {std::move(mean), std::move(cov)};
  out.cross = std::move(cross);
  return out;
}

FilterOutput run_filter(GaussianFilterKind kind, const TransitionCache& transitions, const TimeSeriesData& data,
                        const FilterOptions& options) {
  data.validate();
  const DgpModel& model = transitions.model();
  const Eigen::RowVectorXd h = model.observation_row();

  FilterOutput out;
  out.initial_time = options.initial_time.value_or(default_initial_time(data));
  out.initial = options.initial.value_or(model.initial_condition());
  out.times = data.times;
  const std::size_t n = data.size();
  out.predicted.reserve(n);
  out.filtered.reserve(n);

  GaussianBelief current = out.initial;
  double t_prev = out.initial_time;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t step = k + 1;
    const double dt = data.times[k] - t_prev;
    if (!(dt > 0.0)) throw ConfigError("initial time must precede the first time stamp");
    const DiscretizedTransition& tr = transitions.at(dt);
    Prediction pred = kind == GaussianFilterKind::Extended ? predict_extended(tr, current)
                                                           : predict_cubature(tr, current, step);
    if (!all_finite(pred.belief)) throw StepError("filter diverged", step);
    if (pred.indefinite) ++out.indefinite_steps;

    const double f_mean = h * pred.belief.mean;
    const double f_var = std::max(0.0, double(h * pred.belief.cov * h.transpose()));
    out.pred_f_mean.push_back(f_mean);
    out.pred_f_var.push_back(f_var);

    GaussianBelief updated = pred.belief;
    if (data.has_measurement(k)) {
      const double s = f_var + data.noise_var[k];
      if (!(s > 0.0)) throw StepError("degenerate innovation", step);
      const double lp = log_normal(data.y[k], f_mean, s);
      out.log_pred.push_back(lp);
      out.log_likelihood += lp;
      updated = kalman_update(pred.belief, data.y[k], h, data.noise_var[k]);
      if (!all_finite(updated)) throw StepError("filter diverged", step);
    } else {
      out.log_pred.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    out.predicted.push_back(std::move(pred.belief));
    out.cross_cov.push_back(std::move(pred.cross));
    out.filtered.push_back(updated);
    current = std::move(updated);
    t_prev = data.times[k];
  }
  return out;
}

}  // namespace

GaussianBelief kalman_update(const GaussianBelief& predicted, double y, const Eigen::RowVectorXd& h, double r) {
  const Vector ph = predicted.cov * h.transpose();
  const double s = h.dot(ph) + r;
  if (!(s > 0.0)) throw NumericalError("degenerate innovation");
  const Vector gain = ph / s;
  const int n = static_cast<int>(predicted.mean.size());
  GaussianBelief out;
  out.mean = predicted.mean + gain * (y - h.dot(predicted.mean));
  const Matrix a = Matrix::Identity(n, n) - gain * h;
  out.cov = a * predicted.cov * a.transpose() + r * gain * gain.transpose();
  symmetrize(out.cov);
  return out;
}

FilterOutput ekf_filter(const TransitionCache& transitions, const TimeSeriesData& data, const FilterOptions& options) {
  return run_filter(GaussianFilterKind::Extended, transitions, data, options);
}

FilterOutput ckf_filter(const TransitionCache& transitions, const TimeSeriesData& data, const FilterOptions& options) {
  return run_filter(GaussianFilterKind::Cubature, transitions, data, options);
}

FilterOutput gaussian_filter(GaussianFilterKind kind, const TransitionCache& transitions, const TimeSeriesData& data,
                             const FilterOptions& options) {
  return run_filter(kind, transitions, data, options);
}

SmootherOutput rts_smooth(const FilterOutput& f) {
  const std::size_t n = f.size();
  SmootherOutput out;
  out.steps.resize(n);
  if (n == 0) {
    out.initial = f.initial;
    return out;
  }
  out.steps[n - 1] = f.filtered[n - 1];
  for (std::size_t k = n; k-- > 0;) {
    // smooth the belief preceding step k (k = 0 is the initial state)
    const GaussianBelief& prev = k == 0 ? f.initial : f.filtered[k - 1];
    const GaussianBelief& pred = f.predicted[k];
    const GaussianBelief& next = out.steps[k];
    const int d = static_cast<int>(pred.mean.size());
    const double trace = pred.cov.trace();
    const Matrix reg = pred.cov + kRegularization * std::max(trace, 0.0) * Matrix::Identity(d, d);
    Eigen::LDLT<Matrix> ldlt(reg);
    Matrix gain = Matrix::Zero(d, d);
    if (trace > 0.0) gain = ldlt.solve(f.cross_cov[k].transpose()).transpose();
    GaussianBelief s;
    s.mean = prev.mean + gain * (next.mean - pred.mean);
    s.cov = prev.cov + gain * (next.cov - pred.cov) * gain.transpose();
    symmetrize(s.cov);
    if (k == 0) {
      out.initial = std::move(s);
    } else {
      out.steps[k - 1] = std::move(s);
    }
  }
  return out;
}

double nlpd(const FilterOutput& f, const TimeSeriesData& data) {
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!data.has_measurement(k)) continue;
    const double var = f.pred_f_var[k] + data.noise_var[k];
    if (!(var > 0.0)) throw StepError("non-positive predictive variance", k + 1);
    total -= log_normal(data.y[k], f.pred_f_mean[k], var);
  }
  return total;
}

void observe(const std::vector<GaussianBelief>& beliefs, const Eigen::RowVectorXd& h, std::vector<double>& mean,
             std::vector<double>& var) {
  mean.clear();
  var.clear();
  for (const auto& b : beliefs) {
    mean.push_back(h * b.mean);
    var.push_back(std::max(0.0, double(h * b.cov * h.transpose())));
  }
}

}  // namespace ssdgp
