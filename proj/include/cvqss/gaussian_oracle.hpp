#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cvqss/types.hpp"

namespace cvqss {

/// Real symmetric covariance matrix in SNU, quadrature order (x1,p1,x2,p2,...).
struct CovarianceMatrix {
  Eigen::MatrixXd entries;

  int dim() const { return static_cast<int>(entries.rows()); }
  int modes() const { return dim() / 2; }

  /// Largest violation of gamma + i*Omega >= 0 (0 when physical).
  double physicality_violation() const;
  bool is_physical(double tol = 1e-9) const { return physicality_violation() <= tol; }
};

/// Two-mode entanglement-based state shared by the honest player and the
/// dealer after the channel: [[V I, c sz], [c sz, T(V+chi_line) I]] with
/// c = sqrt(T (V^2 - 1)). Its symplectic spectrum equals {lambda_1, lambda_2}.
CovarianceMatrix build_eb_state(double v, double t_j, double chi_line);

struct DetectorModel {
  double eta_d = 1.0;
  double nu_el = 0.0;
};

/// State of the unmeasured modes conditioned on the dealer's heterodyne
/// outcome, with the detector modeled as a beam splitter of transmittance
/// eta_D fed by one half of an EPR pair of variance 1 + 2 nu_el / (1 - eta_D).
/// For eta_D < 1 the result is the 6x6 covariance of (player, ancilla', EPR
/// twin) whose symplectic spectrum is {lambda_3, lambda_4, 1}. The eta_D = 1
/// detector has no ancilla; the electronic noise is added directly to the
/// measured mode and the result is the player's 2x2 conditional covariance
/// (exact for nu_el = 0, documented approximation otherwise).
CovarianceMatrix conditional_state_after_heterodyne(const CovarianceMatrix& cov_ab,
                                                    const DetectorModel& detector);

/// Symplectic spectrum: |eigenvalues of i Omega gamma|, deduplicated into
/// dim/2 values sorted descending. Throws on non-symmetric input or when a
/// +/- pair disagrees beyond 1e-6 relative.
std::vector<double> symplectic_eigs(const CovarianceMatrix& cov);

}  // namespace cvqss
