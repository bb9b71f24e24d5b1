#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cvqss/keyrate.hpp"
#include "cvqss/optimizer.hpp"

using namespace cvqss;

namespace {

SystemParams fig_params(double eps0) {
  SystemParams p;
  p.gamma = 0.2;
  p.epsilon0 = eps0;
  p.nu_el = 0.1;
  p.eta_d = 0.5;
  p.f_rec = 0.95;
  return p;
}

double dense_grid_max(const NetworkLayout& layout, const SystemParams& params,
                      double lo, double hi, int points) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    const double va = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    best = std::max(best, qss_rate(layout, params, va).r_qss);
  }
  return best;
}

}  // namespace

TEST_CASE("monotone objective pins to the upper bound") {
  SystemParams ideal;
  ideal.gamma = 0.0;
  ideal.epsilon0 = 0.0;
  ideal.nu_el = 0.0;
  ideal.eta_d = 1.0;
  ideal.f_rec = 1.0;
  const NetworkLayout layout = NetworkLayout::equal_spacing(1, 0.0);
  const OptimizationResult res = optimize_va(layout, ideal);
  CHECK(res.at_boundary);
  CHECK(res.va_opt == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK(res.r_opt == doctest::Approx(std::log2(1002.0 / 2.0)).epsilon(1e-12));
}

TEST_CASE("matches a dense grid at the n=2, L=10 km point") {
  const SystemParams p = fig_params(0.01);
  const NetworkLayout layout = NetworkLayout::equal_spacing(2, 10.0);
  const OptimizationResult res = optimize_va(layout, p);
  const double dense = dense_grid_max(layout, p, 0.01, 1000.0, 2000);
  CHECK(res.r_opt >= dense - 1e-6);
  CHECK(res.r_opt == doctest::Approx(0.2361).epsilon(2e-3));
  CHECK(!res.at_boundary);
}

TEST_CASE("result beats every coarse-grid point by construction") {
  const SystemParams p = fig_params(0.001);
  const NetworkLayout layout = NetworkLayout::equal_spacing(5, 30.0);
  OptimizeOptions opts;
  const OptimizationResult res = optimize_va(layout, p, opts);
  for (int i = 0; i < opts.grid_points; ++i) {
    const double t = static_cast<double>(i) / (opts.grid_points - 1);
    const double va =
        std::exp(std::log(opts.v_lo) + t * (std::log(opts.v_hi) - std::log(opts.v_lo)));
    CHECK(res.r_opt >= qss_rate(layout, p, va).r_qss - 1e-15);
  }
  CHECK(res.evaluations == opts.grid_points + 2 + opts.refine_iters);
}

TEST_CASE("phase-noise coupling is evaluated inside the objective") {
  SystemParams p = fig_params(0.001);
  p.delta = 1e-3;
  const NetworkLayout layout = NetworkLayout::equal_spacing(20, 20.0);
  const OptimizationResult with_noise = optimize_va(layout, p);
  const double dense = dense_grid_max(layout, p, 0.01, 1000.0, 2000);
  CHECK(with_noise.r_opt >= dense - 1e-6);

  SystemParams quiet = p;
  quiet.delta = 0.0;
  const OptimizationResult without = optimize_va(layout, quiet);
  // The V_A * delta penalty pushes the optimum far down (about 1.6 vs 7.2).
  CHECK(with_noise.va_opt < 0.5 * without.va_opt);
  CHECK(with_noise.r_opt < without.r_opt);
}

TEST_CASE("determinism and input validation") {
  const SystemParams p = fig_params(0.01);
  const NetworkLayout layout = NetworkLayout::equal_spacing(3, 15.0);
  const OptimizationResult a = optimize_va(layout, p);
  const OptimizationResult b = optimize_va(layout, p);
  CHECK(a.va_opt == b.va_opt);
  CHECK(a.r_opt == b.r_opt);
  CHECK(a.evaluations == b.evaluations);

  OptimizeOptions bad;
  bad.v_lo = -1.0;
  CHECK_THROWS_AS(optimize_va(layout, p, bad), ConfigError);
  bad = OptimizeOptions{};
  bad.v_hi = bad.v_lo;
  CHECK_THROWS_AS(optimize_va(layout, p, bad), ConfigError);

  const auto nan_objective = [](double) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(maximize_scalar(nan_objective, OptimizeOptions{}), ConfigError);
}
