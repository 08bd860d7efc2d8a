#pragma once

#include "dpskrate/channel.hpp"
#include "dpskrate/entropy.hpp"
#include "dpskrate/params.hpp"
#include "dpskrate/solver.hpp"

namespace dpsk {

// Additive pieces of the expected-length bound, all in bits. The raw total
// is fq_term + kappa_term - ec_cost - ec_validation_cost - pa_cost +
// constant; the expected length clamps it at zero.
struct LengthBreakdown {
  double fq_term = 0.0;             // n * (f weighted by the honest q)
  double kappa_term = 0.0;          // n * kappa
  double ec_cost = 0.0;             // n * per-round error-correction leakage
  double ec_validation_cost = 0.0;  // ceil(log2(1 / eps_ec))
  double pa_cost = 0.0;             // (alpha/(alpha-1)) * log2(1 / eps_pa)
  double constant = 2.0;

  double total() const {
    return fq_term + kappa_term - ec_cost - ec_validation_cost - pa_cost +
           constant;
  }
};

struct SolveReports {
  SolveReport tradeoff;
  SolveReport kappa;
};

// One evaluated parameter point. A positive expected_length is always backed
// by both dual certificates; when either solve fails to converge the length
// and the rate are zeroed outright, and the reports say why.
struct KeyRateResult {
  double kappa = 0.0;
  TradeoffFunction f;
  double expected_length = 0.0;
  double rate_per_pulse = 0.0;  // expected_length / n
  LengthBreakdown breakdown;
  SolveReports reports;
  double alpha_used = 0.0;

  bool certified() const {
    return reports.tradeoff.status == SolveStatus::converged &&
           reports.kappa.status == SolveStatus::converged;
  }
};

// Assembles the length bound from already-solved pieces; no clamping beyond
// the outer max with zero. The caller is responsible for only feeding pairs
// (f, kappa) that actually came out of certified solves.
KeyRateResult expected_key_length(const ProtocolParams& params,
                                  const TradeoffFunction& f, double kappa,
                                  const ClickStatistics& stats);

// Full pipeline at fixed parameters: honest statistics, tradeoff solve,
// kappa solve warm-started from the tradeoff optimizer. The second overload
// reuses a prebuilt problem and statistics so parameter searches do not pay
// for operator construction at every index value.
KeyRateResult key_rate(const ProtocolParams& params);
KeyRateResult key_rate(const ProtocolParams& params, const KeyRateProblem& prob,
                       const ClickStatistics& stats);

// Line-search controls for the Renyi index. The bracket is on alpha - 1 and
// is scanned on a log scale; golden-section then refines around the best
// coarse point. Every candidate goes through the certified pipeline, so the
// returned point is sound no matter how the search went.
struct AlphaSearch {
  double lo = 1e-5;  // alpha - 1, lower edge
  double hi = 0.5;   // alpha - 1, upper edge
  int coarse_points = 7;
  int golden_iterations = 12;
};

KeyRateResult optimize_alpha(const ProtocolParams& params,
                             const AlphaSearch& search = {});
KeyRateResult optimize_alpha(const ProtocolParams& params,
                             const KeyRateProblem& prob,
                             const ClickStatistics& stats,
                             const AlphaSearch& search = {});

// Box and budget for the modulation search. nested is the cheaper index
// search used at every simplex vertex; polish is the full-quality one run at
// the end (on both the starting point and the simplex winner, so the result
// never loses to the fixed default modulation).
struct ModulationSearch {
  double beta_lo = 0.1;
  double beta_hi = 1.0;
  double pk_lo = 0.5;
  double pk_hi = 0.995;
  double beta_start = 0.45;
  double pk_start = 0.96;
  int max_evaluations = 48;
  double simplex_tol = 1e-3;
  AlphaSearch nested{1e-5, 0.5, 5, 7};
  AlphaSearch polish{};
};

struct ModulationResult {
  ProtocolParams params;  // winning beta, p_k and alpha written back
  KeyRateResult result;
};

// Nelder-Mead over (beta, p_k) with a nested index search per vertex. When
// the initial simplex lands entirely on a zero-rate plateau, a fixed coarse
// lattice over the box seeds the restart (it counts against the evaluation
// budget). Deterministic: fixed initial simplex and lattice, no randomness
// anywhere, repeated vertices served from a memo.
ModulationResult optimize_modulation(const ProtocolParams& params,
                                     const ModulationSearch& search = {});

// Minimum pulse period imposed by the no-signaling timing constraint over a
// link of the given length, and whether a proposed period satisfies it.
// channel_light_speed must lie in (0, 3e8] m/s.
struct TimingCheck {
  double min_period_s = 0.0;
  bool feasible = false;
};

TimingCheck timing_feasibility(double distance_m, double channel_light_speed,
                               double pulse_period_s);

}  // namespace dpsk
