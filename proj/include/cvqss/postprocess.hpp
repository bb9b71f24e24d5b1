#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvqss/montecarlo.hpp"
#include "cvqss/types.hpp"

namespace cvqss {

struct PostprocessOptions {
  std::uint64_t seed = 1;       ///< disclosure-selection randomness
  double t_fraction = 0.10;     ///< share of pulses disclosed for transmittance estimation
  double round_disclose_fraction = 0.5;  ///< disclosed share within each per-player round
  std::size_t min_samples = 1000;
  double abort_sigma = 3.0;   ///< non-physical estimate gates
  double tamper_sigma = 5.0;  ///< announcement-consistency gates
  std::vector<double> round_weights;  ///< optional per-round share of non-T pulses
  int threads = 0;
};

/// Which stage a pulse was disclosed for. Pulses keep exactly one role, so
/// disclosed data is never reused (step 5 / step 7 subsets are disjoint).
struct PulseRole {
  bool t_round = false;
  int round = 0;  ///< 1-based honest-player round when !t_round
  bool disclosed = false;
};

PulseRole pulse_role(std::uint64_t seed, std::size_t pulse, int n,
                     const PostprocessOptions& options);

struct TransmittanceEstimate {
  double sqrt_t_hat = 0.0;
  double t_hat = 0.0;
  double se_t = 0.0;         ///< derived standard error of t_hat
  double announced_va = 0.0; ///< sample modulation variance of the announcements, SNU
};

struct EstimationReport {
  std::size_t samples = 0;
  double va = 0.0;  ///< declared (calibrated) modulation variance used
  std::vector<TransmittanceEstimate> players;
};

/// Step 5: per-player transmittance from the disclosed subset,
/// sqrt(T_k) = [Cov(x_d', x_k) + Cov(p_d', p_k)] / (2 V_A N0).
/// Throws EstimationError on insufficient samples, degenerate announcements,
/// covariance negative beyond abort_sigma, or announcement-variance mismatch
/// beyond tamper_sigma (tamper flag set).
EstimationReport estimate_transmittance(const BatchView& batch, const SystemParams& params,
                                        const NetworkLayout& layout, double va,
                                        const PostprocessOptions& options);

/// Step 8 displacement on an explicit pulse subset:
/// x_R = x_d' - sum_{k != honest} sqrt(T_hat_k) x_k. Also returns the honest
/// player's symbols for the same pulses.
void displace(const BatchView& batch, const std::vector<double>& sqrt_t_hat, int honest,
              std::span<const std::size_t> pulses, std::vector<double>& xr,
              std::vector<double>& pr, std::vector<double>& xj, std::vector<double>& pj);

struct RoundEstimate {
  int honest = 1;
  std::size_t samples = 0;      ///< disclosed pulses in this round
  std::size_t key_pulses = 0;   ///< undisclosed pulses kept as key material
  double va_hat = 0.0;
  double t_hat = 0.0;
  double se_t = 0.0;
  double eps_hat = 0.0;  ///< lumped excess noise referred to the honest channel input
  double se_eps = 0.0;
  double r_hat = 0.0;
  bool aborted = false;  ///< r_hat <= 0 (no secure key from this pairing)
};

/// Raw sums of one round's disclosed residual/symbol pairs (both quadratures).
struct RoundMoments {
  std::size_t m = 0;            ///< disclosed pulses
  std::size_t key_pulses = 0;   ///< undisclosed pulses (key material)
  double sx = 0, sxx = 0;       ///< honest symbols, x quadrature
  double sp = 0, spp = 0;
  double sr_x = 0, srr_x = 0;   ///< residuals
  double sr_p = 0, srr_p = 0;
  double srx = 0, srp = 0;      ///< residual-symbol cross terms
};

/// Method-of-moments inversion of one per-player round. `expected_eps` is the
/// configured lumped noise budget used for the consistency gate. Throws
/// EstimationError on non-physical or inconsistent estimates.
RoundEstimate estimate_per_player_rate(int honest, const RoundMoments& moments,
                                       const SystemParams& params, double declared_va,
                                       double expected_eps,
                                       const PostprocessOptions& options);

/// Plumbing identity with the analytic path: the rate the dealer assigns to
/// estimates (va, t_j, lumped eps referred to the channel input).
double rate_from_estimates(double va_hat, double t_hat, double eps_hat,
                           const SystemParams& params);

struct QssRoundReport {
  EstimationReport transmittance;
  std::vector<RoundEstimate> rounds;
  double r_min = 0.0;
  int argmin = 1;
  bool aborted = false;  ///< some round produced r_hat <= 0
};

/// Steps 6-10 on one batch: transmittance estimation, n honest-player rounds
/// on disjoint subsets, minimum rate. Tamper/estimation failures throw
/// EstimationError; a non-positive estimated rate only sets the abort flag.
QssRoundReport qss_round(const BatchView& batch, const SystemParams& params,
                         const NetworkLayout& layout, double va,
                         const PostprocessOptions& options);

/// (n,n)-threshold XOR sharing: E = M xor K_1 xor ... xor K_n.
std::vector<std::uint8_t> share(std::span<const std::uint8_t> message,
                                const std::vector<std::vector<std::uint8_t>>& keys);
std::vector<std::uint8_t> recover(std::span<const std::uint8_t> encrypted,
                                  const std::vector<std::vector<std::uint8_t>>& keys);

}  // namespace cvqss
