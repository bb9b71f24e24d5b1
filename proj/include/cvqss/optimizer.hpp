#pragma once

#include <functional>

#include "cvqss/types.hpp"

namespace cvqss {

struct OptimizeOptions {
  double v_lo = 0.01;
  double v_hi = 1000.0;
  int grid_points = 60;   ///< logarithmic coarse grid
  int refine_iters = 64;  ///< golden-section iterations inside the best bracket
};

struct OptimizationResult {
  double va_opt = 0.0;
  double r_opt = 0.0;
  int evaluations = 0;
  double bracket_lo = 0.0;  ///< final search interval
  double bracket_hi = 0.0;
  bool at_boundary = false;  ///< coarse-grid argmax sat on v_lo or v_hi
};

/// Maximizes a scalar objective over [v_lo, v_hi]: logarithmic coarse grid,
/// then golden-section refinement around the best grid point. The result is
/// guaranteed >= the best coarse-grid value; no global-optimality claim.
OptimizationResult maximize_scalar(const std::function<double(double)>& objective,
                                   const OptimizeOptions& options);

/// Optimizes the shared modulation variance against the QSS rate
/// min_j R_j(V_A). The objective re-evaluates the full noise budget per
/// candidate, so the phase-noise coupling eps0 + V_A delta is live.
OptimizationResult optimize_va(const NetworkLayout& layout, const SystemParams& params,
                               const OptimizeOptions& options = {});

}  // namespace cvqss
