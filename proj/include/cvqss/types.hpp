#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cvqss {

/// Invalid configuration or input file contents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside the physical domain of the Gaussian model
/// (negative discriminants, symplectic eigenvalues below 1, ...).
class UnphysicalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter-estimation failure during post-processing. `tamper` is set when
/// the failure pattern indicates inconsistent announcements rather than
/// ordinary statistics (degenerate input, variance mismatch, ...).
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, bool tamper_flag = false)
      : std::runtime_error(what), tamper(tamper_flag) {}
  bool tamper = false;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical system and detector parameters. All noise variances are in
/// shot-noise units (SNU) except N0, the shot-noise variance itself.
struct SystemParams {
  double gamma = 0.2;     ///< fiber attenuation, dB/km
  double epsilon0 = 0.01; ///< per-player excess noise at that player's station, SNU
  double nu_el = 0.1;     ///< detector electronic noise variance, SNU
  double eta_d = 0.5;     ///< detector efficiency, (0,1]
  double f_rec = 0.95;    ///< reconciliation efficiency, (0,1]
  double t_b = 1.0;       ///< per-station beam-splitter transmittance, (0,1]
  double delta = 0.0;     ///< phase-noise variance, rad^2
  double n0 = 0.25;       ///< shot-noise variance, absolute units

  void validate() const;
};

/// Dealer-to-player fiber distances. Player 1 is the farthest (the one whose
/// state crosses every other station); distances are non-increasing in k.
struct NetworkLayout {
  int n = 1;           ///< player count
  double length = 0.0; ///< dealer-to-farthest-player fiber length, km
  std::vector<double> distances; ///< l_k in km, k = 1..n

  /// Equal-spacing default: l_k = (n-k+1) L / n.
  static NetworkLayout equal_spacing(int n, double length_km);
  /// Explicit per-player distances (sorted check applies).
  static NetworkLayout with_distances(std::vector<double> distances_km);

  void validate() const;
};

/// Channel/detector noise budget referred to the channel input of the honest
/// player, Eqs. (3)-(6).
struct NoiseBudget {
  int honest_index = 1;          ///< 1-based player index j
  double chi_het = 0.0;          ///< detector-added noise, SNU
  std::vector<double> epsilon_k; ///< per-player excess noise referred to channel input
  double chi_line = 0.0;         ///< channel-added noise, SNU
  double chi_tot = 0.0;          ///< overall noise, SNU
};

}  // namespace cvqss
