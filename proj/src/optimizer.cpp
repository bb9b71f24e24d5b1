#include "cvqss/optimizer.hpp"

#include <cmath>
#include <vector>

#include "cvqss/keyrate.hpp"

namespace cvqss {

OptimizationResult maximize_scalar(const std::function<double(double)>& objective,
                                   const OptimizeOptions& options) {
  if (!(options.v_lo > 0.0) || !(options.v_lo < options.v_hi))
    throw ConfigError("optimizer needs 0 < v_lo < v_hi");
  if (options.grid_points < 2) throw ConfigError("optimizer needs >= 2 grid points");

  OptimizationResult result;
  auto eval = [&](double v) {
    ++result.evaluations;
    return objective(v);
  };

  const double log_lo = std::log(options.v_lo);
  const double log_hi = std::log(options.v_hi);
  std::vector<double> grid(static_cast<std::size_t>(options.grid_points));
  std::vector<double> value(grid.size());
  std::size_t best = 0;
  bool any_finite = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    grid[i] = std::exp(log_lo + t * (log_hi - log_lo));
    value[i] = eval(grid[i]);
    if (std::isfinite(value[i])) {
      if (!any_finite || value[i] > value[best]) best = i;
      any_finite = true;
    }
  }
  if (!any_finite)
    throw ConfigError("objective is non-finite on the whole coarse grid");

  result.at_boundary = (best == 0 || best + 1 == grid.size());
  result.va_opt = grid[best];
  result.r_opt = value[best];

  // Golden-section inside the bracket around the coarse argmax. No
  // unimodality assumption is made beyond this bracket.
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[best + 1 >= grid.size() ? grid.size() - 1 : best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < options.refine_iters; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
    if (fc > result.r_opt) {
      result.r_opt = fc;
      result.va_opt = c;
    }
    if (fd > result.r_opt) {
      result.r_opt = fd;
      result.va_opt = d;
    }
  }
  result.bracket_lo = a;
  result.bracket_hi = b;
  return result;
}

OptimizationResult optimize_va(const NetworkLayout& layout, const SystemParams& params,
                               const OptimizeOptions& options) {
  return maximize_scalar(
      [&](double va) { return qss_rate(layout, params, va).r_qss; }, options);
}

}  // namespace cvqss
