#include "cvqss/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace cvqss {

namespace {

Eigen::MatrixXd symplectic_form(int modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (int m = 0; m < modes; ++m) {
    omega(2 * m, 2 * m + 1) = 1.0;
    omega(2 * m + 1, 2 * m) = -1.0;
  }
  return omega;
}

void require_symmetric(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols() || g.rows() % 2 != 0)
    throw UnphysicalError("covariance matrix must be even-dimensional square");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw UnphysicalError("covariance matrix is not symmetric");
}

/// Heterodyne conditioning: gamma_keep - sigma (gamma_b + I)^-1 sigma^T,
/// measuring the single mode at index `measured`.
Eigen::MatrixXd heterodyne_condition(const Eigen::MatrixXd& g, int measured,
                                     double extra_noise = 0.0) {
  const int dim = static_cast<int>(g.rows());
  std::vector<int> keep;
  for (int i = 0; i < dim; ++i)
    if (i / 2 != measured) keep.push_back(i);

  Eigen::Matrix2d gb = g.block<2, 2>(2 * measured, 2 * measured);
  gb += (1.0 + extra_noise) * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d gb_inv = gb.inverse();

  Eigen::MatrixXd gk(keep.size(), keep.size());
  Eigen::MatrixXd sigma(keep.size(), 2);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    sigma(static_cast<int>(r), 0) = g(keep[r], 2 * measured);
    sigma(static_cast<int>(r), 1) = g(keep[r], 2 * measured + 1);
    for (std::size_t c = 0; c < keep.size(); ++c)
      gk(static_cast<int>(r), static_cast<int>(c)) = g(keep[r], keep[c]);
  }
  return gk - sigma * gb_inv * sigma.transpose();
}

}  // namespace

double CovarianceMatrix::physicality_violation() const {
  require_symmetric(entries);
  const int m = modes();
  Eigen::MatrixXcd h = entries.cast<std::complex<double>>() +
                       std::complex<double>(0.0, 1.0) * symplectic_form(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw UnphysicalError("eigensolver failed on physicality check");
  const double min_ev = solver.eigenvalues().minCoeff();
  return std::max(0.0, -min_ev);
}

CovarianceMatrix build_eb_state(double v, double t_j, double chi_line) {
  if (!(v >= 1.0)) throw UnphysicalError("EB state needs V >= 1");
  if (!(t_j > 0.0 && t_j <= 1.0)) throw UnphysicalError("EB state needs T in (0, 1]");
  if (!(chi_line >= 0.0)) throw UnphysicalError("EB state needs chi_line >= 0");
  const double c = std::sqrt(t_j * (v * v - 1.0));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g.block<2, 2>(0, 0) = v * Eigen::Matrix2d::Identity();
  g.block<2, 2>(2, 2) = t_j * (v + chi_line) * Eigen::Matrix2d::Identity();
  Eigen::Matrix2d sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  g.block<2, 2>(0, 2) = c * sz;
  g.block<2, 2>(2, 0) = c * sz;
  return {g};
}

CovarianceMatrix conditional_state_after_heterodyne(const CovarianceMatrix& cov_ab,
                                                    const DetectorModel& detector) {
  require_symmetric(cov_ab.entries);
  if (cov_ab.dim() != 4)
    throw UnphysicalError("conditional state expects a two-mode (4x4) input");
  if (!(detector.eta_d > 0.0 && detector.eta_d <= 1.0))
    throw UnphysicalError("detector efficiency must be in (0, 1]");

  if (detector.eta_d == 1.0) {
    // No loss port to purify; fold the electronic noise into the measured
    // quadrature variance instead. Both quadratures of a heterodyne carry it.
    return {heterodyne_condition(cov_ab.entries, 1, 2.0 * detector.nu_el)};
  }

  // Modes: A(0), B(1), F(2), G(3). (F, G) is the EPR pair purifying the
  // detector noise; the beam splitter mixes (B, F).
  const double v_anc = 1.0 + 2.0 * detector.nu_el / (1.0 - detector.eta_d);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(8, 8);
  g.block<4, 4>(0, 0) = cov_ab.entries;
  Eigen::Matrix2d sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  g.block<2, 2>(4, 4) = v_anc * Eigen::Matrix2d::Identity();
  g.block<2, 2>(6, 6) = v_anc * Eigen::Matrix2d::Identity();
  g.block<2, 2>(4, 6) = std::sqrt(v_anc * v_anc - 1.0) * sz;
  g.block<2, 2>(6, 4) = std::sqrt(v_anc * v_anc - 1.0) * sz;

  Eigen::MatrixXd bs = Eigen::MatrixXd::Identity(8, 8);
  const double t = std::sqrt(detector.eta_d);
  const double r = std::sqrt(1.0 - detector.eta_d);
  bs.block<2, 2>(2, 2) = t * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 4) = r * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(4, 2) = -r * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(4, 4) = t * Eigen::Matrix2d::Identity();
  g = bs * g * bs.transpose();

  return {heterodyne_condition(g, 1)};
}

std::vector<double> symplectic_eigs(const CovarianceMatrix& cov) {
  require_symmetric(cov.entries);
  const int m = cov.modes();
  Eigen::MatrixXcd im_omega_g =
      std::complex<double>(0.0, 1.0) *
      (symplectic_form(m) * cov.entries).cast<std::complex<double>>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(im_omega_g, false);
  if (solver.info() != Eigen::Success)
    throw UnphysicalError("eigensolver failed on i*Omega*gamma");

  std::vector<double> all(static_cast<std::size_t>(2 * m));
  for (int i = 0; i < 2 * m; ++i) all[static_cast<std::size_t>(i)] = std::abs(solver.eigenvalues()(i));
  std::sort(all.begin(), all.end(), std::greater<>());

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double a = all[static_cast<std::size_t>(2 * i)];
    const double b = all[static_cast<std::size_t>(2 * i + 1)];
    if (std::abs(a - b) > 1e-6 * std::max(1.0, a))
      throw UnphysicalError("symplectic spectrum does not pair up");
    out.push_back(0.5 * (a + b));
  }
  return out;
}

}  // namespace cvqss
