#pragma once

#include <string_view>
#include <vector>

#include "dpskrate/channel.hpp"
#include "dpskrate/entropy.hpp"
#include "dpskrate/feasible.hpp"
#include "dpskrate/hermitian.hpp"
#include "dpskrate/measurement.hpp"
#include "dpskrate/params.hpp"

namespace dpsk {

enum class SolveStatus { converged, max_iter, infeasible };

std::string_view to_string(SolveStatus s);

// Outcome summary of one conic solve. dual_value always bounds the true
// optimum from the safe side; it comes from an exact eigenvalue inequality
// evaluated at the final iterate, so it stays valid even when the iteration
// stopped early. status == infeasible is the only state in which the numbers
// cannot be trusted.
struct SolveReport {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // |dual - primal| / max(1, |dual|)
  int iterations = 0;
  double feasibility_residual = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  // The tradeoff reference distribution had zero entries lifted to a small
  // floor before use (the returned f is exact for the lifted distribution).
  bool reference_smoothed = false;
};

// Everything both programs need at one parameter point: the feasible set,
// the announcement operators and the key map. Built once and shared across
// alpha evaluations, which is what keeps parameter searches affordable.
struct KeyRateProblem {
  ProtocolParams params;
  FeasibleSet set;
  GammaOperators gammas;
  KeySuperoperator key_map;
};

KeyRateProblem make_problem(const ProtocolParams& params);

struct KappaSolution {
  double kappa = 0.0;
  DensityMatrix omega_star;
  SolveReport report;
};

// Worst-case normalization correction for a fixed tradeoff function:
// maximizes the weighted objective's argument over the feasible set and
// reports kappa through the certified side, so kappa is a valid lower bound
// on the true worst case whenever status != infeasible. A warm start (a
// feasible state from a nearby solve) skips most of the barrier path.
KappaSolution solve_kappa(const TradeoffFunction& f, double alpha,
                          const KeyRateProblem& prob,
                          const Matrix* warm_start = nullptr);
KappaSolution solve_kappa(const TradeoffFunction& f, double alpha,
                          const ProtocolParams& params);

struct TradeoffSolution {
  TradeoffFunction f;
  double value = 0.0;  // optimal per-round rate term f.q + kappa(f)
  DensityMatrix omega_star;
  SolveReport report;
};

// Picks the tradeoff function adapted to the observed announcement
// distribution q: minimizes the relative-entropy program whose optimum is
// the best fixed-length rate term, then reads f off the optimizer in closed
// form. Any f is sound, so the quality of this solve affects only how much
// key the caller gets, never the security of the bound.
TradeoffSolution solve_tradeoff(const ClickStatistics& q, double alpha,
                                const KeyRateProblem& prob,
                                const Matrix* warm_start = nullptr);
TradeoffSolution solve_tradeoff(const ClickStatistics& q, double alpha,
                                const ProtocolParams& params);

// Membership tests for the three cones the programs are built from, with a
// signed distance-like residual (nonnegative inside the cone).
struct ConeElement {
  enum class Family { fast_renyi, kl, log };

  Family family = Family::log;
  double epigraph = 0.0;  // u for fast_renyi, h for kl and log

  // fast_renyi payload: (u, rho) with index gamma; membership means
  // u >= -Psi_gamma(rho, Z(rho)). Z is the pinching over the given
  // projectors, or the computational-basis dephasing when none are given.
  DensityMatrix state;
  std::vector<HermitianOperator> pinch;
  double gamma = 0.75;

  // kl payload: h >= D_KL(weights || reference), base-2.
  std::vector<double> weights;
  std::vector<double> reference;

  // log payload: h <= v * log2(u / v) on v > 0, u > 0 plus closure.
  double log_v = 0.0;
  double log_u = 0.0;
};

ConeElement fast_renyi_element(double u, DensityMatrix rho, double gamma,
                               std::vector<HermitianOperator> pinch = {});
ConeElement kl_element(double h, std::vector<double> weights,
                       std::vector<double> reference);
ConeElement log_element(double h, double v, double u);

struct ConeCheck {
  bool member = false;
  double residual = 0.0;  // >= 0 inside, < 0 outside
};

ConeCheck cone_membership(const ConeElement& elem);

}  // namespace dpsk
