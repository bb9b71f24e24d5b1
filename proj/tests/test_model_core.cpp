#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cvqss/model_core.hpp"

using namespace cvqss;

namespace {

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

TEST_CASE("transmittance matches the attenuation law") {
  SystemParams p = fig3_params();
  NetworkLayout layout = NetworkLayout::equal_spacing(2, 50.0);
  CHECK(transmittance(layout, p, 1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(transmittance(layout, p, 2) ==
        doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));

  SystemParams lossless = p;
  lossless.gamma = 0.0;
  for (int k = 1; k <= 2; ++k) CHECK(transmittance(layout, lossless, k) == 1.0);

  CHECK_THROWS_AS(transmittance(layout, p, 0), std::out_of_range);
  CHECK_THROWS_AS(transmittance(layout, p, 3), std::out_of_range);
}

TEST_CASE("t_B = 1 is bit-identical to the pure fiber formula") {
  SystemParams p = fig3_params();
  NetworkLayout layout = NetworkLayout::equal_spacing(5, 37.5);
  for (int k = 1; k <= 5; ++k) {
    const double fiber =
        std::pow(10.0, -p.gamma * layout.distances[static_cast<std::size_t>(k - 1)] / 10.0);
    CHECK(transmittance(layout, p, k) == fiber);
  }
}

TEST_CASE("beam splitters multiply in for the upstream players") {
  SystemParams p = fig3_params();
  p.t_b = 0.99;
  NetworkLayout layout = NetworkLayout::equal_spacing(3, 30.0);
  for (int k = 1; k <= 3; ++k) {
    const double fiber =
        std::pow(10.0, -p.gamma * layout.distances[static_cast<std::size_t>(k - 1)] / 10.0);
    CHECK(transmittance(layout, p, k) ==
          doctest::Approx(std::pow(0.99, 3 - k) * fiber).epsilon(1e-15));
  }
}

TEST_CASE("excess noise referral") {
  SystemParams p = fig3_params();
  NetworkLayout layout = NetworkLayout::equal_spacing(2, 50.0);
  CHECK(excess_noise_referred(layout, p, 1, 2) ==
        doctest::Approx(0.01 * std::pow(10.0, 0.5)).epsilon(1e-12));
  CHECK(excess_noise_referred(layout, p, 1, 1) == p.epsilon0);
  CHECK(excess_noise_referred(layout, p, 2, 2) == p.epsilon0);

  SystemParams quiet = p;
  quiet.epsilon0 = 0.0;
  for (int k = 1; k <= 2; ++k) CHECK(excess_noise_referred(layout, quiet, 1, k) == 0.0);
}

TEST_CASE("phase noise augments every player's station noise") {
  SystemParams p = fig3_params();
  p.delta = 1e-3;
  NetworkLayout layout = NetworkLayout::equal_spacing(2, 50.0);
  const double va = 4.0;
  CHECK(excess_noise_referred(layout, p, 1, 1, va) ==
        doctest::Approx(p.epsilon0 + va * p.delta).epsilon(1e-15));
  CHECK(excess_noise_referred(layout, p, 1, 2, va) ==
        doctest::Approx((p.epsilon0 + va * p.delta) * std::pow(10.0, 0.5)).epsilon(1e-12));
}

TEST_CASE("chi_het") {
  SystemParams p = fig3_params();
  CHECK(chi_het(p) == doctest::Approx(3.4).epsilon(1e-15));
  p.nu_el = 0.0;
  CHECK(chi_het(p) == doctest::Approx(3.0).epsilon(1e-15));
  p.eta_d = 1.0;
  CHECK(chi_het(p) == 1.0);
}

TEST_CASE("noise budget worked examples") {
  SystemParams p = fig3_params();

  NetworkLayout single = NetworkLayout::equal_spacing(1, 50.0);
  NoiseBudget budget1 = noise_budget(single, p, 1, 0.0);
  CHECK(budget1.chi_line == doctest::Approx(9.01).epsilon(1e-12));

  NetworkLayout two = NetworkLayout::equal_spacing(2, 50.0);
  NoiseBudget budget2 = noise_budget(two, p, 1, 0.0);
  CHECK(budget2.chi_line == doctest::Approx(9.041622776601683).epsilon(1e-12));
  CHECK(budget2.chi_tot ==
        doctest::Approx(budget2.chi_line + 3.4 / 0.1).epsilon(1e-12));

  SystemParams ideal;
  ideal.gamma = 0.0;
  ideal.epsilon0 = 0.0;
  ideal.nu_el = 0.0;
  ideal.eta_d = 1.0;
  ideal.f_rec = 1.0;
  NoiseBudget ideal_budget = noise_budget(NetworkLayout::equal_spacing(1, 0.0), ideal, 1, 0.0);
  CHECK(ideal_budget.chi_line == 0.0);
  CHECK(ideal_budget.chi_tot == 1.0);
}

TEST_CASE("layout validation") {
  CHECK_THROWS_AS(NetworkLayout::equal_spacing(0, 10.0), ConfigError);
  CHECK_THROWS_AS(NetworkLayout::equal_spacing(2, -1.0), ConfigError);
  CHECK_THROWS_AS(NetworkLayout::with_distances({10.0, 20.0}), ConfigError);
  CHECK_NOTHROW(NetworkLayout::with_distances({20.0, 10.0, 5.0}));
  CHECK_NOTHROW(NetworkLayout::equal_spacing(3, 0.0));  // all distances tie at 0

  NetworkLayout def = NetworkLayout::equal_spacing(4, 40.0);
  CHECK(def.distances.front() == 40.0);  // l_1 = L
  for (std::size_t i = 1; i < def.distances.size(); ++i)
    CHECK(def.distances[i] < def.distances[i - 1]);
}

TEST_CASE("params validation") {
  SystemParams p;
  p.eta_d = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams{};
  p.f_rec = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams{};
  p.n0 = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams{};
  p.delta = -1e-6;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("budget properties on random configurations") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    SystemParams p;
    p.gamma = 0.05 + 0.4 * u01(rng);
    p.epsilon0 = 0.05 * u01(rng);
    p.nu_el = 0.3 * u01(rng);
    p.eta_d = 0.2 + 0.8 * u01(rng);
    p.t_b = 1.0;
    const int n = 1 + static_cast<int>(u01(rng) * 12);
    const double length = 1.0 + 79.0 * u01(rng);
    NetworkLayout layout = NetworkLayout::equal_spacing(n, length);

    // Closer players lose less.
    for (int k = 2; k <= n; ++k)
      CHECK(transmittance(layout, p, k) > transmittance(layout, p, k - 1));

    for (int j = 1; j <= n; ++j) {
      const double t_j = transmittance(layout, p, j);
      NoiseBudget budget = noise_budget(layout, p, j, 0.0);
      CHECK(budget.chi_line >= 1.0 / t_j - 1.0 - 1e-12);
      CHECK(budget.chi_tot >= budget.chi_line);

      // Dealer-referred total player noise is layout-symmetric:
      // sum_k T_j eps_k = eps0 sum_k T_k.
      double lhs = 0.0, rhs = 0.0;
      for (int k = 1; k <= n; ++k) {
        lhs += t_j * budget.epsilon_k[static_cast<std::size_t>(k - 1)];
        rhs += p.epsilon0 * transmittance(layout, p, k);
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}
