#pragma once

#include <array>
#include <vector>

#include "cvqss/types.hpp"

namespace cvqss {

/// G(x) = (x+1) log2(x+1) - x log2(x), the bosonic entropy kernel.
/// G(0) = 0; x in [-1e-12, 0] is clamped to 0; smaller x throws.
double g_func(double x);

/// Shannon mutual information of the two-quadrature Gaussian channel,
/// log2((V + chi_tot) / (1 + chi_tot)) with V = V_A + 1. Bits per pulse.
double mutual_information(double va, double chi_tot);

/// Symplectic eigenvalues lambda_1 >= lambda_2 of the shared dealer/player
/// state: lambda^2 = [A +- sqrt(A^2 - 4B)]/2 with
/// A = V^2(1-2T) + 2T + T^2 (V+chi_line)^2, B = T^2 (V chi_line + 1)^2.
std::array<double, 2> symplectic_12(double v, double t_j, double chi_line);

/// Symplectic eigenvalues lambda_3 >= lambda_4 of the state conditioned on
/// the dealer's heterodyne outcome (trusted detector model). The companion
/// eigenvalue lambda_5 is identically 1.
std::array<double, 2> symplectic_34(double v, double t_j, double chi_line,
                                    double chi_het, double chi_tot);

/// Holevo bound chi_BE from the five symplectic eigenvalues.
double holevo_bound(const std::array<double, 5>& lambda);

/// Residual phase-noise excess per player, eps_p = V_A * delta (SNU).
double phase_noise_excess(double va, double delta);

/// Secure key rate f * I_AB - chi_BE for a prescribed noise budget. Shared by
/// the analytic path and the post-processing estimators (plumbing identity).
double key_rate_from_budget(double va, double t_j, double chi_line,
                            double chi_het, double f_rec);

/// Two-party asymptotic rate with honest player j, Eq. (1) composed over the
/// noise budget. May be negative; callers decide clamping.
double key_rate(const NetworkLayout& layout, const SystemParams& params,
                double va, int honest_index);

struct PlayerRate {
  int honest_index = 1;
  double va = 0.0;
  double i_ab = 0.0;
  std::array<double, 5> lambda{1, 1, 1, 1, 1};
  double chi_be = 0.0;
  double rate = 0.0;
};

struct KeyRateReport {
  double va = 0.0;  ///< shared modulation variance (per_player carries any vector)
  std::vector<PlayerRate> per_player;
  double r_qss = 0.0;  ///< min_j R_j, unclamped
  int argmin = 1;      ///< 1-based index of the limiting player
};

/// Rates for every honest-player choice and their minimum. `va` is shared by
/// all players; the vector overload accepts one modulation variance per
/// player (used verbatim for that player's round; no optimization over it).
KeyRateReport qss_rate(const NetworkLayout& layout, const SystemParams& params, double va);
KeyRateReport qss_rate(const NetworkLayout& layout, const SystemParams& params,
                       const std::vector<double>& va_per_player);

}  // namespace cvqss
