#include "cvqss/model_core.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqss {

void SystemParams::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (!(epsilon0 >= 0.0)) throw ConfigError("epsilon0 must be >= 0");
  if (!(nu_el >= 0.0)) throw ConfigError("nu_el must be >= 0");
  if (!(eta_d > 0.0 && eta_d <= 1.0)) throw ConfigError("eta_D must be in (0, 1]");
  if (!(f_rec > 0.0 && f_rec <= 1.0)) throw ConfigError("f_rec must be in (0, 1]");
  if (!(t_b > 0.0 && t_b <= 1.0)) throw ConfigError("t_B must be in (0, 1]");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (!(n0 > 0.0)) throw ConfigError("N0 must be > 0");
}

NetworkLayout NetworkLayout::equal_spacing(int n, double length_km) {
  NetworkLayout layout;
  layout.n = n;
  layout.length = length_km;
  layout.distances.resize(n > 0 ? static_cast<std::size_t>(n) : 0);
  for (int k = 1; k <= n; ++k) {
    layout.distances[static_cast<std::size_t>(k - 1)] =
        static_cast<double>(n - k + 1) / n * length_km;
  }
  layout.validate();
  return layout;
}

NetworkLayout NetworkLayout::with_distances(std::vector<double> distances_km) {
  NetworkLayout layout;
  layout.n = static_cast<int>(distances_km.size());
  layout.length = distances_km.empty() ? 0.0 : distances_km.front();
  layout.distances = std::move(distances_km);
  layout.validate();
  return layout;
}

void NetworkLayout::validate() const {
  if (n < 1) throw ConfigError("layout needs n >= 1 players");
  if (!(length >= 0.0)) throw ConfigError("L must be >= 0");
  if (distances.size() != static_cast<std::size_t>(n))
    throw ConfigError("layout has " + std::to_string(distances.size()) +
                      " distances for n = " + std::to_string(n));
  double prev = distances.front();
  if (!(prev >= 0.0)) throw ConfigError("distances must be >= 0");
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (!(distances[i] >= 0.0)) throw ConfigError("distances must be >= 0");
    if (distances[i] > prev)
      throw ConfigError("distances must be non-increasing in player index");
    prev = distances[i];
  }
}

double transmittance(const NetworkLayout& layout, const SystemParams& params, int k) {
  if (k < 1 || k > layout.n)
    throw std::out_of_range("player index " + std::to_string(k) + " out of 1.." +
                            std::to_string(layout.n));
  const double fiber = std::pow(10.0, -params.gamma * layout.distances[static_cast<std::size_t>(k - 1)] / 10.0);
  const double splitters = std::pow(params.t_b, static_cast<double>(layout.n - k));
  return splitters * fiber;
}

double excess_noise_referred(const NetworkLayout& layout, const SystemParams& params,
                             int honest_index, int k, double va) {
  const double t_j = transmittance(layout, params, honest_index);
  if (!(t_j > 0.0)) throw UnphysicalError("honest player's transmittance is zero");
  const double t_k = transmittance(layout, params, k);
  const double eps0_eff = params.epsilon0 + va * params.delta;
  return t_k / t_j * eps0_eff;
}

double chi_het(const SystemParams& params) {
  return (1.0 + (1.0 - params.eta_d) + 2.0 * params.nu_el) / params.eta_d;
}

NoiseBudget noise_budget(const NetworkLayout& layout, const SystemParams& params,
                         int honest_index, double va) {
  const double t_j = transmittance(layout, params, honest_index);
  if (!(t_j > 0.0)) throw UnphysicalError("honest player's transmittance is zero");

  NoiseBudget budget;
  budget.honest_index = honest_index;
  budget.chi_het = chi_het(params);
  budget.epsilon_k.resize(static_cast<std::size_t>(layout.n));
  double eps_sum = 0.0;
  for (int k = 1; k <= layout.n; ++k) {
    const double eps = excess_noise_referred(layout, params, honest_index, k, va);
    budget.epsilon_k[static_cast<std::size_t>(k - 1)] = eps;
    eps_sum += eps;
  }
  budget.chi_line = 1.0 / t_j - 1.0 + eps_sum;
  budget.chi_tot = budget.chi_line + budget.chi_het / t_j;
  return budget;
}

}  // namespace cvqss
