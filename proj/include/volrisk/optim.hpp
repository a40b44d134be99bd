#pragma once

#include <functional>
#include <vector>

namespace volrisk::optim {

using Objective = std::function<double(const std::vector<double>&)>;

struct Options {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;   // on the sup-norm, scaled by 1 + |f|
  double function_tolerance = 1e-12;  // relative change over one iteration
  double fd_step = 1e-6;              // relative finite-difference step
};

struct Result {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Minimizes `f` with BFGS and central-difference gradients. Non-finite objective
/// values are treated as +inf, so a line search backs off from them.
Result minimize_bfgs(const Objective& f, std::vector<double> x0, const Options& opts = {});

std::vector<double> numerical_gradient(const Objective& f, const std::vector<double>& x,
                                       double rel_step = 1e-6);

}  // namespace volrisk::optim
