#pragma once

#include "optdes/types.hpp"

#include <cstddef>
#include <functional>

namespace optdes {

struct NelderMeadOptions {
  std::size_t max_evals = 2000;
  // Restarts from the best vertex with the initial step scaled by `shrink`.
  std::size_t restarts = 2;
  double shrink = 0.5;
  double initial_step = 0.5;
  // Stop when the spread of simplex values falls below this.
  double ftol = 1e-12;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  std::size_t evals = 0;
};

// Unconstrained Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
// Non-finite objective values are treated as +infinity.
MinimizeResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                           const NelderMeadOptions& options = {});

// Quasi-Newton (BFGS) polish with central-difference gradients and a
// backtracking line search.
MinimizeResult bfgs(const std::function<double(const Vector&)>& f, const Vector& x0, std::size_t max_iters = 200,
                    double fd_step = 1e-6, double gtol = 1e-9);

}  // namespace optdes
