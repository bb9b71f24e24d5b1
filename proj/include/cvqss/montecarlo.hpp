#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvqss/types.hpp"

namespace cvqss {

/// One simulated quantum stage: announced player symbols, injected station
/// noise, and the dealer's double-homodyne outcomes. Arrays are indexed
/// [player][pulse] / [pulse]; symbols are in absolute quadrature units.
struct TrialBatch {
  std::uint64_t seed = 0;
  std::size_t pulses = 0;
  int n = 0;
  double va = 0.0;

  std::vector<std::vector<double>> x, p;    ///< player symbols (announced values)
  std::vector<std::vector<double>> ex, ep;  ///< injected excess noise per station
  std::vector<double> xd, pd;               ///< raw dealer outcomes
  std::vector<double> xd_norm, pd_norm;     ///< outcomes / sqrt(eta_D / 2)
};

struct SimOptions {
  std::uint64_t seed = 1;
  std::size_t pulses = 1;
  double va = 4.0;
  int threads = 0;  ///< 0 = use available hardware concurrency
};

/// i.i.d. Gaussian symbol pairs, Var = V_A * N0 per quadrature, independent
/// across players, pulses and quadratures. Streams are addressed by
/// (seed, pulse, player), so output does not depend on call granularity.
void draw_symbols(std::uint64_t seed, double va, double n0, std::size_t pulses, int n,
                  std::vector<std::vector<double>>& x, std::vector<std::vector<double>>& p);

/// Residual phase-error rotation x' = x cos(th) - p sin(th),
/// p' = x sin(th) + p cos(th) with th ~ N(0, delta) per (pulse, player).
/// delta = 0 leaves the symbols bit-identical.
void apply_phase_error(std::uint64_t seed, double delta,
                       std::vector<std::vector<double>>& x,
                       std::vector<std::vector<double>>& p);

/// Dealer double-homodyne outcomes for given (already rotated) symbols:
/// x_d = sqrt(eta_D/2) sum_k sqrt(T_k) (x_k + e_k) + v with
/// e_k ~ N(0, eps0 N0) injected at each station and v ~ N(0, (1 + nu_el) N0)
/// lumping shot, detector-loss and electronic noise.
void propagate_and_measure(const NetworkLayout& layout, const SystemParams& params,
                           std::uint64_t seed,
                           const std::vector<std::vector<double>>& x,
                           const std::vector<std::vector<double>>& p,
                           std::vector<double>& xd, std::vector<double>& pd,
                           std::vector<std::vector<double>>* ex = nullptr,
                           std::vector<std::vector<double>>* ep = nullptr);

/// x_d' = x_d / sqrt(eta_D/2): in these units E[x_d' | symbols] = sum sqrt(T_k) x_k.
void normalize(const SystemParams& params, const std::vector<double>& xd,
               const std::vector<double>& pd, std::vector<double>& xd_norm,
               std::vector<double>& pd_norm);

/// Full quantum stage. The stored symbols are the players' records (before
/// the phase error); the dealer outcomes see the rotated ones.
TrialBatch simulate_batch(const NetworkLayout& layout, const SystemParams& params,
                          const SimOptions& options);

/// Read-only per-pulse access used by the post-processing stage. Implemented
/// by materialized batches and by on-demand regeneration (large runs).
class BatchView {
 public:
  virtual ~BatchView() = default;
  virtual std::size_t pulses() const = 0;
  virtual int players() const = 0;
  /// Announced symbols for every player plus normalized dealer outcomes.
  virtual void load(std::size_t pulse, std::span<double> x, std::span<double> p,
                    double& xd_norm, double& pd_norm) const = 0;
};

class MaterializedBatch final : public BatchView {
 public:
  explicit MaterializedBatch(const TrialBatch& batch) : batch_(batch) {}
  std::size_t pulses() const override { return batch_.pulses; }
  int players() const override { return batch_.n; }
  void load(std::size_t pulse, std::span<double> x, std::span<double> p,
            double& xd_norm, double& pd_norm) const override;

 private:
  const TrialBatch& batch_;
};

/// Regenerates pulses from the counter-based streams instead of storing them;
/// identical contents to simulate_batch with the same inputs.
class GeneratedBatch final : public BatchView {
 public:
  GeneratedBatch(const NetworkLayout& layout, const SystemParams& params,
                 std::uint64_t seed, std::size_t pulses, double va);
  std::size_t pulses() const override { return pulses_; }
  int players() const override { return n_; }
  void load(std::size_t pulse, std::span<double> x, std::span<double> p,
            double& xd_norm, double& pd_norm) const override;

 private:
  std::size_t pulses_;
  int n_;
  double va_;
  std::uint64_t seed_;
  double n0_, delta_;
  double sym_sd_, exc_sd_, det_sd_, amp_, inv_amp_;
  std::vector<double> sqrt_t_;
};

/// Announcement tampering for tests and the tamper-detection path: one
/// player's announced symbols are scaled; dealer outcomes stay untouched.
class TamperedBatch final : public BatchView {
 public:
  TamperedBatch(const BatchView& base, int player, double scale)
      : base_(base), player_(player), scale_(scale) {}
  std::size_t pulses() const override { return base_.pulses(); }
  int players() const override { return base_.players(); }
  void load(std::size_t pulse, std::span<double> x, std::span<double> p,
            double& xd_norm, double& pd_norm) const override;

 private:
  const BatchView& base_;
  int player_;
  double scale_;
};

/// CSV schema (stable public contract):
/// pulse_id,x_1,p_1,...,x_n,p_n,x_d,p_d,x_d_norm,p_d_norm
void write_batch_csv(const TrialBatch& batch, const std::string& path);
TrialBatch read_batch_csv(const std::string& path);

}  // namespace cvqss
