#pragma once

// Limited-memory BFGS with a strong-Wolfe line search.

#include "ssdgp/types.hpp"

#include <functional>
#include <ostream>
#include <string>

namespace ssdgp {

/// Returns the loss; fills *gradient when non-null. May throw NumericalError at
/// points where the loss is undefined, which the line search treats as +inf.
using Objective = std::function<double(const Vector& x, Vector* gradient)>;

struct OptimizeOptions {
  int max_iterations = 500;
  int memory = 10;
  double gradient_tolerance = 1e-6;
  /// Stop when a step improves the loss by less than this times max(1, |loss|).
  double loss_tolerance = 1e-14;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
};

struct IterationRecord {
  int iteration;
  double loss;
  double gradient_norm;
};

struct OptimizeResult {
  Vector x;
  double loss = 0.0;
  Vector gradient;
  int iterations = 0;
  bool converged = false;
  /// The line search failed; x is the best point seen so far.
  bool line_search_failed = false;
  std::string message;
  std::vector<IterationRecord> log;
};

/// Errors: NumericalError when the objective is undefined at x0.
OptimizeResult optimize_lbfgs(const Objective& objective, Vector x0, const OptimizeOptions& options = {});

/// CSV with header "iteration,loss,gradient_norm".
void write_iteration_log(const std::vector<IterationRecord>& log, std::ostream& out);

}  // namespace ssdgp
