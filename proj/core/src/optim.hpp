#pragma once

#include <functional>
#include <vector>

namespace zic::detail {

struct OptimResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// BFGS with central-difference gradients (step 1e-6 * (1 + |x_i|),
/// one-sided fallback where the objective is infinite) and Armijo
/// backtracking.  The objective signals domain exits by returning +inf.
OptimResult minimize(const Objective& f, std::vector<double> x0,
                     int max_iter = 500, double tol = 1e-6);

/// Central-difference gradient used by minimize(), exposed for reuse.
std::vector<double> fd_gradient(const Objective& f,
                                const std::vector<double>& x, double fx);

}  // namespace zic::detail
