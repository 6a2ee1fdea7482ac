#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace eegx {

struct NelderMeadOptions {
  std::size_t max_evaluations = 4000;
  double f_tolerance = 1e-10;  ///< stop when the simplex's value spread is below this
  double x_tolerance = 1e-9;   ///< and its largest vertex offset is below this
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimisation. The objective may return +inf to
/// mark infeasible points; the start must be feasible.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace eegx
