#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvqss/optimizer.hpp"
#include "cvqss/types.hpp"

namespace cvqss {

struct SweepSpec {
  std::vector<double> lengths;  ///< L values, km
  std::vector<int> players;     ///< n values
  std::vector<double> deltas{0.0};
  SystemParams params;
  OptimizeOptions optimizer;
  int threads = 0;

  void validate() const;
};

/// One sweep grid point. Column order is the public CSV contract.
struct SweepRow {
  double length = 0.0;
  int n = 0;
  double delta = 0.0;
  double va_opt = 0.0;
  double i_ab = 0.0;    ///< of the limiting player at va_opt
  double chi_be = 0.0;
  double r_raw = 0.0;
  double r_clamped = 0.0;
  int argmin = 1;
  bool va_at_boundary = false;
};

inline const char* kSweepCsvHeader =
    "L_km,n,delta,va_opt,i_ab,chi_be,r_raw,r_clamped,argmin_player,va_at_boundary";

/// Evaluates every (n, delta, L) grid point with V_A optimized per point.
/// Rows come back sorted by (n, delta, L); bit-deterministic for a given
/// spec regardless of thread count.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

/// Largest grid L with r_raw > rate_floor for the given n (delta = first in
/// spec); nullopt when the rate never clears the floor.
std::optional<double> max_distance(const std::vector<SweepRow>& rows, int n,
                                   double rate_floor = 0.0, double delta = 0.0);

/// Self-contained gnuplot script: one curve per (n, delta) series, log-scale
/// rate axis, non-positive rates break the curve.
void emit_plot_script(const std::string& csv_path, const std::string& script_path);

/// Built-in parameter sets behind the three reference figures.
SweepSpec figure3_spec();
SweepSpec figure4_spec();
SweepSpec figure5_spec();

}  // namespace cvqss
