#include "ssdgp/optimize.hpp"

#include <cmath>
#include <deque>
#include <cstdio>
#include <limits>
#include <optional>

namespace ssdgp {

namespace {

struct Probe {
  double alpha;
  double loss;
  double slope;  // directional derivative
  Vector x;
  Vector gradient;
  bool finite;
};

Probe evaluate(const Objective& f, const Vector& x0, const Vector& dir, double alpha) {
  Probe p{alpha, std::numeric_limits<double>::infinity(), 0.0, x0 + alpha * dir, Vector(), false};
  try {
    p.loss = f(p.x, &p.gradient);
  } catch (const NumericalError&) {
    return p;
  }
  p.finite = std::isfinite(p.loss) && p.gradient.size() == x0.size() && p.gradient.allFinite();
  if (p.finite) p.slope = p.gradient.dot(dir);
  return p;
}

// Minimizer of the cubic through (a, fa, da), (b, fb, db), safeguarded into the interval.
double interpolate(const Probe& lo, const Probe& hi) {
  const double a = lo.alpha, b = hi.alpha;
  double t = 0.5 * (a + b);
  if (hi.finite) {
    const double d1 = lo.slope + hi.slope - 3.0 * (lo.loss - hi.loss) / (a - b);
    const double disc = d1 * d1 - lo.slope * hi.slope;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), b - a);
      const double denom = hi.slope - lo.slope + 2.0 * d2;
      if (denom != 0.0) t = b - (b - a) * (hi.slope + d2 - d1) / denom;
    }
  }
  const double lo_bound = std::min(a, b), hi_bound = std::max(a, b);
  const double margin = 0.1 * (hi_bound - lo_bound);
  if (!std::isfinite(t) || t < lo_bound + margin || t > hi_bound - margin) t = 0.5 * (a + b);
  return t;
}

}  // namespace

OptimizeResult optimize_lbfgs(const Objective& objective, Vector x0, const OptimizeOptions& options) {
  OptimizeResult result;
  Vector gradient;
  double loss = objective(x0, &gradient);
  if (!std::isfinite(loss) || !gradient.allFinite()) throw NumericalError("objective undefined at the initial point");
  Vector x = std::move(x0);

  std::deque<Vector> s_hist;
  std::deque<Vector> y_hist;
  std::deque<double> rho_hist;

  result.log.push_back({0, loss, gradient.norm()});
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (gradient.norm() < options.gradient_tolerance) {
      result.converged = true;
      result.message = "gradient tolerance reached";
      break;
    }
    // two-loop recursion
    Vector q = gradient;
    std::vector<double> alphas(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alphas[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alphas[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Vector dir = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += s_hist[i] * (alphas[i] - beta);
    }
    dir = -dir;
    double slope0 = gradient.dot(dir);
    if (!(slope0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -gradient;
      slope0 = -gradient.squaredNorm();
    }

    // strong-Wolfe line search (bracketing then zoom)
    const Probe start{0.0, loss, slope0, x, gradient, true};
    double alpha = s_hist.empty() ? std::min(1.0, 1.0 / gradient.norm()) : 1.0;
    Probe prev = start;
    std::optional<Probe> accepted;
    int evals = 0;
    std::optional<Probe> lo, hi;
    while (evals < options.max_line_search) {
      Probe p = evaluate(objective, x, dir, alpha);
      ++evals;
      if (!p.finite || p.loss > loss + options.c1 * alpha * slope0 || (evals > 1 && p.loss >= prev.loss)) {
        lo = prev;
        hi = p;
        break;
      }
      if (std::abs(p.slope) <= -options.c2 * slope0) {
        accepted = p;
        break;
      }
      if (p.slope >= 0.0) {
        lo = p;
        hi = prev;
        break;
      }
      prev = p;
      alpha *= 2.0;
    }
    while (!accepted && lo && evals < options.max_line_search) {
      const double trial = interpolate(*lo, *hi);
      Probe p = evaluate(objective, x, dir, trial);
      ++evals;
      if (!p.finite || p.loss > loss + options.c1 * trial * slope0 || p.loss >= lo->loss) {
        hi = p;
      } else {
        if (std::abs(p.slope) <= -options.c2 * slope0) {
          accepted = p;
          break;
        }
        if (p.slope * (hi->alpha - lo->alpha) >= 0.0) hi = lo;
        lo = p;
      }
      if (std::abs(hi->alpha - lo->alpha) < 1e-16 * std::max(1.0, std::abs(lo->alpha))) break;
    }
    // fall back to a sufficient-decrease point when curvature could not be met
    if (!accepted && lo && lo->alpha > 0.0 && lo->loss < loss) accepted = *lo;
    if (!accepted) {
      result.line_search_failed = true;
      result.message = "line search failed";
      break;
    }

    const Vector s = accepted->x - x;
    const Vector y = accepted->gradient - gradient;
    const double improvement = loss - accepted->loss;
    x = accepted->x;
    gradient = accepted->gradient;
    loss = accepted->loss;
    result.log.push_back({iter + 1, loss, gradient.norm()});

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (improvement <= options.loss_tolerance * std::max(1.0, std::abs(loss))) {
      ++iter;
      result.converged = true;
      result.message = "loss change below tolerance";
      break;
    }
  }
  if (iter == options.max_iterations && result.message.empty()) result.message = "iteration limit reached";
  if (!result.converged && gradient.norm() < options.gradient_tolerance) {
    result.converged = true;
    result.message = "gradient tolerance reached";
  }
  result.x = std::move(x);
  result.loss = loss;
  result.gradient = std::move(gradient);
  result.iterations = iter;
  return result;
}

void write_iteration_log(const std::vector<IterationRecord>& log, std::ostream& out) {
  out << "iteration,loss,gradient_norm\n";
  char buf[96];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.iteration, r.loss, r.gradient_norm);
    out << buf;
  }
}

}  // namespace ssdgp
