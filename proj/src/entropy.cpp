#include "dpskrate/entropy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpskrate/psi.hpp"

namespace dpsk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha_window(double alpha) {
  if (!(alpha > 1.0) || !(alpha < 2.0))
    throw std::invalid_argument("alpha must lie in (1,2), got " +
                                std::to_string(alpha));
}

}  // namespace

double dot(const TradeoffFunction& f, const ClickStatistics& stats) {
  double acc = 0.0;
  for (Outcome c : kOutcomes) acc += f.value(c) * stats.q(c);
  return acc;
}

double kl_divergence(const std::vector<double>& p,
                     const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("distributions differ in length: " +
                                std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()));
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0)
      throw std::invalid_argument("negative probability at index " +
                                  std::to_string(i));
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    acc += p[i] * std::log2(p[i] / q[i]);
  }
  return acc;
}

double sandwiched_divergence(const DensityMatrix& rho,
                             const DensityMatrix& sigma, double alpha) {
  const double tr = rho.mat().trace().real();
  if (!(tr > 0.0))
    throw std::invalid_argument("divergence needs tr(rho) > 0");
  const PsiValue psi = detail::psi_general(rho.mat(), sigma.mat(), alpha);
  if (alpha > 1.0 && !psi.support_ok) return kInf;
  return std::log2(psi.value / tr) / (alpha - 1.0);
}

double entropy_lower_bound(const DensityMatrix& omega,
                           const KeySuperoperator& key_map, double gamma) {
  if (!(gamma > 0.5) || !(gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (1/2,1), got " +
                                std::to_string(gamma));
  if (omega.dim() != key_map.in_sig.dim())
    throw std::invalid_argument("state dimension " +
                                std::to_string(omega.dim()) +
                                " does not match key map input " +
                                std::to_string(key_map.in_sig.dim()));

  const Matrix tau = key_map.apply(omega.mat());
  const double tr = tau.trace().real();
  if (tr <= 1e-300) return kInf;  // no key rounds ever happen

  const PsiValue psi = detail::psi_general(tau, key_map.pinch(tau), gamma);
  return std::log2(psi.value / tr) / (gamma - 1.0);
}

double fweighted_objective(const DensityMatrix& omega,
                           const TradeoffFunction& f, double alpha,
                           const GammaOperators& gammas,
                           const KeySuperoperator& key_map, double p_k) {
  check_alpha_window(alpha);
  if (std::abs(p_k - gammas.p_k) > 1e-12)
    throw std::invalid_argument(
        "p_k disagrees with the one the Gamma operators were built for");

  const double gamma = 1.0 / alpha;
  const double scale = (alpha - 1.0) / alpha;

  const Matrix& w = omega.mat();
  double s = 0.0;
  s += (gammas.gamma_cc.mat * w).trace().real() * std::exp2(scale * f.cc);
  s += (gammas.gamma_wc.mat * w).trace().real() * std::exp2(scale * f.wc);
  s += (gammas.gamma_nc.mat * w).trace().real() * std::exp2(scale * f.nc);

  const Matrix tau = key_map.apply(w);
  const PsiValue psi = detail::psi_general(tau, key_map.pinch(tau), gamma);
  s += p_k * std::exp2(scale * f.bot) * psi.value;

  if (!(s > 0.0))
    throw std::runtime_error("entropy objective evaluated to " +
                             std::to_string(s) +
                             ", state is outside the feasible region");
  return (alpha / (1.0 - alpha)) * std::log2(s);
}

}  // namespace dpsk
