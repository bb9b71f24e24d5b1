#pragma once

#include "cvqss/types.hpp"

namespace cvqss {

/// Overall transmittance seen by player k's signal: the fiber span plus the
/// n-k beam splitters at downstream stations. Reduces to 10^(-gamma l_k / 10)
/// when t_B = 1. k is 1-based.
double transmittance(const NetworkLayout& layout, const SystemParams& params, int k);

/// Excess noise of player k referred to the channel input of honest player j:
/// (T_k / T_j) * eps0_eff. `va` > 0 adds the phase-noise term V_A * delta to
/// every player's station noise; pass va = 0 for the bare eps0.
double excess_noise_referred(const NetworkLayout& layout, const SystemParams& params,
                             int honest_index, int k, double va = 0.0);

/// Detector-added noise referred to the dealer's input:
/// [1 + (1 - eta_D) + 2 nu_el] / eta_D. Always >= 1.
double chi_het(const SystemParams& params);

/// Full noise budget for honest player j at modulation variance va:
/// chi_line = 1/T_j - 1 + sum_k eps_k, chi_tot = chi_line + chi_het / T_j.
NoiseBudget noise_budget(const NetworkLayout& layout, const SystemParams& params,
                         int honest_index, double va);

}  // namespace cvqss
