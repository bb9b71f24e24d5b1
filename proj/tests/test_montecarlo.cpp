#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "cvqss/model_core.hpp"
#include "cvqss/montecarlo.hpp"

using namespace cvqss;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

SystemParams fig3_params() {
  SystemParams p;
  p.gamma = 0.2;
  p.epsilon0 = 0.01;
  p.nu_el = 0.1;
  p.eta_d = 0.5;
  p.f_rec = 0.95;
  return p;
}

}  // namespace

TEST_CASE("symbol draws have the declared moments") {
  const double va = 4.0, n0 = 0.25;
  const std::size_t pulses = 1000000;
  std::vector<std::vector<double>> x, p;
  draw_symbols(99, va, n0, pulses, 2, x, p);

  const double target = va * n0;
  const double se_var = target * std::sqrt(2.0 / static_cast<double>(pulses));
  CHECK(std::abs(variance(x[0]) - target) <= 3.0 * se_var);
  CHECK(std::abs(variance(p[1]) - target) <= 3.0 * se_var);

  const double se_mean = std::sqrt(target / static_cast<double>(pulses));
  CHECK(std::abs(mean(x[0])) <= 5.0 * se_mean);
  CHECK(std::abs(mean(p[0])) <= 5.0 * se_mean);

  const double se_cov = target / std::sqrt(static_cast<double>(pulses));
  CHECK(std::abs(covariance(x[0], x[1])) <= 3.0 * se_cov);
  CHECK(std::abs(covariance(x[0], p[0])) <= 3.0 * se_cov);

  CHECK_THROWS_AS(draw_symbols(1, 0.0, n0, 10, 1, x, p), ConfigError);
}

TEST_CASE("phase error rotation") {
  const double va = 4.0, n0 = 0.25;
  const std::size_t pulses = 1000000;
  std::vector<std::vector<double>> x, p;
  draw_symbols(5, va, n0, pulses, 1, x, p);

  SUBCASE("delta = 0 is the identity") {
    auto x2 = x, p2 = p;
    apply_phase_error(5, 0.0, x2, p2);
    CHECK(x2 == x);
    CHECK(p2 == p);
  }

  SUBCASE("rotation preserves the quadrature norm") {
    auto x2 = x, p2 = p;
    apply_phase_error(5, 1e-2, x2, p2);
    for (std::size_t i = 0; i < 1000; ++i) {
      const double before = x[0][i] * x[0][i] + p[0][i] * p[0][i];
      const double after = x2[0][i] * x2[0][i] + p2[0][i] * p2[0][i];
      CHECK(after == doctest::Approx(before).epsilon(1e-12));
    }
  }

  SUBCASE("small rotations reproduce eps_p = V_A delta") {
    for (double delta : {1e-3, 1e-2}) {
      auto x2 = x, p2 = p;
      apply_phase_error(5, delta, x2, p2);
      double err = 0.0;
      for (std::size_t i = 0; i < pulses; ++i) {
        const double dx = x2[0][i] - x[0][i];
        const double dp = p2[0][i] - p[0][i];
        err += dx * dx + dp * dp;
      }
      const double measured = err / (2.0 * static_cast<double>(pulses) * n0);
      CHECK(measured == doctest::Approx(va * delta).epsilon(0.10));
    }
  }
}

TEST_CASE("dealer outcome moments at the n=2, L=50 km point") {
  SystemParams params = fig3_params();
  const NetworkLayout layout = NetworkLayout::equal_spacing(2, 50.0);
  SimOptions opts;
  opts.seed = 2024;
  opts.pulses = 1000000;
  opts.va = 4.0;
  const TrialBatch batch = simulate_batch(layout, params, opts);

  const double t1 = transmittance(layout, params, 1);
  const double t2 = transmittance(layout, params, 2);
  const double n0 = params.n0;

  // Var(x_d)/N0 = (eta/2) sum_k T_k (V_A + eps0) + 1 + nu_el.
  const double var_model =
      (params.eta_d / 2.0) * (t1 + t2) * (opts.va + params.epsilon0) + 1.0 + params.nu_el;
  const double n = static_cast<double>(opts.pulses);
  const double se_var = var_model * std::sqrt(2.0 / n);
  CHECK(std::abs(variance(batch.xd) / n0 - var_model) <= 3.0 * se_var);
  CHECK(std::abs(variance(batch.pd) / n0 - var_model) <= 3.0 * se_var);

  // Cov(x_d, x_1)/N0 = sqrt(eta T_1 / 2) V_A ~= 0.63246.
  const double cov_model = std::sqrt(params.eta_d * t1 / 2.0) * opts.va;
  CHECK(cov_model == doctest::Approx(0.6324555320336759).epsilon(1e-12));
  const double se_cov =
      std::sqrt((var_model * opts.va + cov_model * cov_model) / n);
  CHECK(std::abs(covariance(batch.xd, batch.x[0]) / n0 - cov_model) <= 3.0 * se_cov);

  // x and p channels are independent.
  const double se_xp = std::sqrt(var_model * var_model / n);
  CHECK(std::abs(covariance(batch.xd, batch.pd) / n0) <= 3.0 * se_xp);
}

TEST_CASE("ideal heterodyne of a single-player ensemble") {
  SystemParams params;
  params.gamma = 0.0;
  params.epsilon0 = 0.0;
  params.nu_el = 0.0;
  params.eta_d = 1.0;
  const NetworkLayout layout = NetworkLayout::equal_spacing(1, 0.0);
  SimOptions opts;
  opts.seed = 77;
  opts.pulses = 1000000;
  opts.va = 4.0;
  const TrialBatch batch = simulate_batch(layout, params, opts);
  const double model = opts.va / 2.0 + 1.0;
  const double se = model * std::sqrt(2.0 / static_cast<double>(opts.pulses));
  CHECK(std::abs(variance(batch.xd) / params.n0 - model) <= 3.0 * se);
}

TEST_CASE("normalized outcomes") {
  SystemParams params = fig3_params();
  const NetworkLayout layout = NetworkLayout::equal_spacing(2, 50.0);
  SimOptions opts;
  opts.seed = 31;
  opts.pulses = 200000;
  opts.va = 4.0;
  const TrialBatch batch = simulate_batch(layout, params, opts);

  // eta_D = 0.5 means the scale factor is exactly 2.
  for (std::size_t i = 0; i < 100; ++i)
    CHECK(batch.xd_norm[i] == batch.xd[i] * 2.0);

  // Regression slope of x_d' on x_1 estimates sqrt(T_1).
  const double slope = covariance(batch.xd_norm, batch.x[0]) / variance(batch.x[0]);
  const double t1 = transmittance(layout, params, 1);
  const double var_norm = variance(batch.xd_norm) / params.n0;
  const double se_slope = std::sqrt((var_norm / opts.va - t1) /
                                    static_cast<double>(opts.pulses));
  CHECK(std::abs(slope - std::sqrt(t1)) <= 3.0 * se_slope);
}

TEST_CASE("fixed seed is bit-identical across thread counts") {
  SystemParams params = fig3_params();
  params.delta = 1e-3;
  const NetworkLayout layout = NetworkLayout::equal_spacing(3, 30.0);
  SimOptions opts;
  opts.seed = 7;
  opts.pulses = 100000;
  opts.va = 4.0;
  opts.threads = 1;
  const TrialBatch a = simulate_batch(layout, params, opts);
  opts.threads = 4;
  const TrialBatch b = simulate_batch(layout, params, opts);
  CHECK(a.x == b.x);
  CHECK(a.p == b.p);
  CHECK(a.ex == b.ex);
  CHECK(a.xd == b.xd);
  CHECK(a.pd == b.pd);
  CHECK(a.xd_norm == b.xd_norm);
}

TEST_CASE("generated view reproduces the materialized batch") {
  SystemParams params = fig3_params();
  params.delta = 1e-4;
  const NetworkLayout layout = NetworkLayout::equal_spacing(2, 25.0);
  SimOptions opts;
  opts.seed = 123;
  opts.pulses = 5000;
  opts.va = 6.0;
  const TrialBatch batch = simulate_batch(layout, params, opts);
  const GeneratedBatch view(layout, params, opts.seed, opts.pulses, opts.va);

  std::vector<double> x(2), p(2);
  for (std::size_t i = 0; i < opts.pulses; ++i) {
    double xd = 0.0, pd = 0.0;
    view.load(i, x, p, xd, pd);
    CHECK(x[0] == batch.x[0][i]);
    CHECK(x[1] == batch.x[1][i]);
    CHECK(p[0] == batch.p[0][i]);
    CHECK(xd == batch.xd_norm[i]);
    CHECK(pd == batch.pd_norm[i]);
  }
}

TEST_CASE("batch CSV round-trips bit-exactly") {
  SystemParams params = fig3_params();
  const NetworkLayout layout = NetworkLayout::equal_spacing(2, 10.0);
  SimOptions opts;
  opts.seed = 9;
  opts.pulses = 2000;
  opts.va = 4.0;
  const TrialBatch batch = simulate_batch(layout, params, opts);

  const std::string path =
      (std::filesystem::temp_directory_path() / "cvqss_batch_roundtrip.csv").string();
  write_batch_csv(batch, path);
  const TrialBatch loaded = read_batch_csv(path);
  std::remove(path.c_str());

  REQUIRE(loaded.pulses == batch.pulses);
  REQUIRE(loaded.n == batch.n);
  CHECK(loaded.x == batch.x);
  CHECK(loaded.p == batch.p);
  CHECK(loaded.xd == batch.xd);
  CHECK(loaded.pd == batch.pd);
  CHECK(loaded.xd_norm == batch.xd_norm);
  CHECK(loaded.pd_norm == batch.pd_norm);

  CHECK_THROWS_AS(read_batch_csv("/nonexistent/batch.csv"), IoError);
}
