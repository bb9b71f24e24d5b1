#include "cvqss/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvqss/model_core.hpp"

namespace cvqss {

namespace {

constexpr double kGTol = 1e-12;
constexpr double kLambdaTol = 1e-9;

/// Eigenvalue pair from sum = lambda_hi^2 + lambda_lo^2 and the factored
/// discriminant (kept >= 0 by construction to avoid cancellation; the raw
/// A^2 - 4B form loses ~sqrt(eps) digits near pure states).
std::array<double, 2> eig_pair(double sum, double prod, double disc, const char* what) {
  const double root = std::sqrt(std::max(disc, 0.0));
  double hi2 = (sum + root) / 2.0;
  double lo2 = 2.0 * prod / (sum + root);
  for (double* l2 : {&hi2, &lo2}) {
    if (*l2 < 1.0 - kLambdaTol)
      throw UnphysicalError(std::string(what) + ": symplectic eigenvalue below 1");
    *l2 = std::max(*l2, 1.0);
  }
  return {std::sqrt(hi2), std::sqrt(lo2)};
}

void check_channel_domain(double v, double t_j, double chi_line, const char* what) {
  if (!(v >= 1.0)) throw UnphysicalError(std::string(what) + ": V must be >= 1");
  if (!(t_j > 0.0 && t_j <= 1.0))
    throw UnphysicalError(std::string(what) + ": T must be in (0, 1]");
  if (!(chi_line >= 0.0))
    throw UnphysicalError(std::string(what) + ": chi_line must be >= 0");
}

}  // namespace

double g_func(double x) {
  if (x < -kGTol) throw UnphysicalError("g_func argument below -1e-12");
  if (x <= 0.0) return 0.0;
  return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

double mutual_information(double va, double chi_tot) {
  const double v = va + 1.0;
  return std::log2((v + chi_tot) / (1.0 + chi_tot));
}

std::array<double, 2> symplectic_12(double v, double t_j, double chi_line) {
  check_channel_domain(v, t_j, chi_line, "symplectic_12");
  // A = s^2 + 2 sqrt(B), A^2 - 4B = s^2 (s^2 + 4 sqrt(B)) with
  // s = V - T(V + chi_line), sqrt(B) = T(V chi_line + 1): same A and B as the
  // textbook forms, but free of the V^2 cancellation at T -> 1.
  const double s = v - t_j * (v + chi_line);
  const double rb = t_j * (v * chi_line + 1.0);
  const double a = s * s + 2.0 * rb;
  const double disc = s * s * (s * s + 4.0 * rb);
  return eig_pair(a, rb * rb, disc, "symplectic_12");
}

std::array<double, 2> symplectic_34(double v, double t_j, double chi_line,
                                    double chi_het, double chi_tot) {
  check_channel_domain(v, t_j, chi_line, "symplectic_34");
  if (!(chi_het >= 1.0))
    throw UnphysicalError("symplectic_34: chi_het must be >= 1");
  const double s = v - t_j * (v + chi_line);
  const double rb = t_j * (v * chi_line + 1.0);
  const double w = t_j * (v + chi_line);
  const double denom = t_j * (v + chi_tot);
  const double denom2 = denom * denom;
  // C -+ 2 sqrt(D) factor into squares / positive sums, so the discriminant
  // C^2 - 4D = m_minus * m_plus / S^4 never cancels.
  const double m_minus = (chi_het * s + rb - 1.0) * (chi_het * s + rb - 1.0);
  const double m_plus = chi_het * chi_het * (s * s + 4.0 * rb) +
                        2.0 * chi_het * (v + w) * (rb + 1.0) + (rb + 1.0) * (rb + 1.0) +
                        4.0 * t_j * (v * v - 1.0);
  const double c = (m_minus + m_plus) / (2.0 * denom2);
  const double d_root = (v + rb * chi_het) / denom;
  const double d = d_root * d_root;
  const double disc = (m_minus / denom2) * (m_plus / denom2);
  return eig_pair(c, d, disc, "symplectic_34");
}

double holevo_bound(const std::array<double, 5>& lambda) {
  return g_func((lambda[0] - 1.0) / 2.0) + g_func((lambda[1] - 1.0) / 2.0) -
         g_func((lambda[2] - 1.0) / 2.0) - g_func((lambda[3] - 1.0) / 2.0) -
         g_func((lambda[4] - 1.0) / 2.0);
}

double phase_noise_excess(double va, double delta) { return va * delta; }

double key_rate_from_budget(double va, double t_j, double chi_line,
                            double chi_het, double f_rec) {
  const double v = va + 1.0;
  const double chi_tot = chi_line + chi_het / t_j;
  const double i_ab = mutual_information(va, chi_tot);
  const auto l12 = symplectic_12(v, t_j, chi_line);
  const auto l34 = symplectic_34(v, t_j, chi_line, chi_het, chi_tot);
  const double chi_be = holevo_bound({l12[0], l12[1], l34[0], l34[1], 1.0});
  return f_rec * i_ab - chi_be;
}

double key_rate(const NetworkLayout& layout, const SystemParams& params,
                double va, int honest_index) {
  const NoiseBudget budget = noise_budget(layout, params, honest_index, va);
  const double t_j = transmittance(layout, params, honest_index);
  return key_rate_from_budget(va, t_j, budget.chi_line, budget.chi_het, params.f_rec);
}

namespace {

KeyRateReport qss_rate_impl(const NetworkLayout& layout, const SystemParams& params,
                            const std::vector<double>& va_of) {
  KeyRateReport report;
  report.va = va_of.front();
  report.per_player.reserve(static_cast<std::size_t>(layout.n));
  for (int j = 1; j <= layout.n; ++j) {
    const double va = va_of[static_cast<std::size_t>(j - 1)];
    const NoiseBudget budget = noise_budget(layout, params, j, va);
    const double t_j = transmittance(layout, params, j);
    PlayerRate pr;
    pr.honest_index = j;
    pr.va = va;
    const double v = va + 1.0;
    pr.i_ab = mutual_information(va, budget.chi_tot);
    const auto l12 = symplectic_12(v, t_j, budget.chi_line);
    const auto l34 = symplectic_34(v, t_j, budget.chi_line, budget.chi_het, budget.chi_tot);
    pr.lambda = {l12[0], l12[1], l34[0], l34[1], 1.0};
    pr.chi_be = holevo_bound(pr.lambda);
    pr.rate = params.f_rec * pr.i_ab - pr.chi_be;
    report.per_player.push_back(pr);
  }
  report.argmin = 1;
  report.r_qss = report.per_player.front().rate;
  for (int j = 2; j <= layout.n; ++j) {
    const double r = report.per_player[static_cast<std::size_t>(j - 1)].rate;
    if (r < report.r_qss) {
      report.r_qss = r;
      report.argmin = j;
    }
  }
  return report;
}

}  // namespace

KeyRateReport qss_rate(const NetworkLayout& layout, const SystemParams& params, double va) {
  return qss_rate_impl(layout, params,
                       std::vector<double>(static_cast<std::size_t>(layout.n), va));
}

KeyRateReport qss_rate(const NetworkLayout& layout, const SystemParams& params,
                       const std::vector<double>& va_per_player) {
  if (va_per_player.size() != static_cast<std::size_t>(layout.n))
    throw ConfigError("per-player V_A vector size does not match player count");
  return qss_rate_impl(layout, params, va_per_player);
}

}  // namespace cvqss
