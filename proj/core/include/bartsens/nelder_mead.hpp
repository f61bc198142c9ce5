#pragma once

#include <functional>
#include <vector>

namespace bartsens {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double simplex_tolerance = 1e-8;    // stop when simplex diameter falls below
  double objective_tolerance = 1e-12; // or when the best value falls below
  double initial_step = 0.5;          // per-coordinate offset for the start simplex
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization with the standard reflection /
/// expansion / contraction / shrink coefficients (1, 2, 0.5, 0.5).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start,
                             const NelderMeadOptions& options = {});

}  // namespace bartsens
