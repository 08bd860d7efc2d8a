#include "dpskrate/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpsk {
namespace {

// Internal light speed; pairs with the dB loss convention used everywhere.
constexpr double kVacuumLightSpeed = 3.0e8;  // m/s

constexpr double kInvGolden = 0.61803398874989484820;

// One certified evaluation. warm seeds the tradeoff solve; on success the
// tradeoff optimizer is written to *omega_out so the caller can chain warm
// starts across nearby parameter values. Failures of any kind collapse to a
// zero-length result carrying whatever reports were produced.
KeyRateResult evaluate_point(const ProtocolParams& params,
                             const KeyRateProblem& prob,
                             const ClickStatistics& stats, const Matrix* warm,
                             Matrix* omega_out) {
  SolveReports reports;
  try {
    const TradeoffSolution ts = solve_tradeoff(stats, params.alpha, prob, warm);
    reports.tradeoff = ts.report;
    if (omega_out && ts.report.status != SolveStatus::infeasible)
      *omega_out = ts.omega_star.mat();
    const KappaSolution ks =
        solve_kappa(ts.f, params.alpha, prob, &ts.omega_star.mat());
    reports.kappa = ks.report;
    if (reports.tradeoff.status == SolveStatus::converged &&
        reports.kappa.status == SolveStatus::converged) {
      KeyRateResult out = expected_key_length(params, ts.f, ks.kappa, stats);
      out.reports = reports;
      return out;
    }
  } catch (const std::exception&) {
    // Swallowed on purpose: a throwing solve is just another failed point.
  }
  KeyRateResult out = expected_key_length(params, TradeoffFunction{}, 0.0, stats);
  out.expected_length = 0.0;
  out.rate_per_pulse = 0.0;
  out.reports = reports;
  return out;
}

ClickStatistics honest_statistics(const ProtocolParams& params) {
  return click_statistics(
      params, channel_from_loss_db(params.chi_db, params.xi, params.n_max));
}

}  // namespace

void validate(const ProtocolParams& p) {
  auto bad = [](const char* field) {
    throw std::invalid_argument(std::string("ProtocolParams: ") + field +
                                " out of range");
  };
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) bad("beta");
  if (!(p.gamma_mod > 0.0) || !std::isfinite(p.gamma_mod)) bad("gamma_mod");
  if (!(p.p_k > 0.0 && p.p_k < 1.0)) bad("p_k");
  if (!(p.p_d >= 0.0 && p.p_d < 1.0)) bad("p_d");
  if (!(p.chi_db >= 0.0) || !std::isfinite(p.chi_db)) bad("chi_db");
  if (!(p.xi >= 0.0) || !std::isfinite(p.xi)) bad("xi");
  if (!(p.f_ec >= 1.0) || !std::isfinite(p.f_ec)) bad("f_ec");
  if (p.n < 1) bad("n");
  if (!(p.eps_ec > 0.0 && p.eps_ec <= 1.0)) bad("eps_ec");
  if (!(p.eps_pa > 0.0 && p.eps_pa <= 1.0)) bad("eps_pa");
  if (!(p.alpha > 1.0 && p.alpha < 2.0)) bad("alpha");
  if (p.n_max < 1) bad("n_max");
}

KeyRateResult expected_key_length(const ProtocolParams& params,
                                  const TradeoffFunction& f, double kappa,
                                  const ClickStatistics& stats) {
  const double n = static_cast<double>(params.n);
  KeyRateResult out;
  out.kappa = kappa;
  out.f = f;
  out.alpha_used = params.alpha;
  out.breakdown.fq_term = n * dot(f, stats);
  out.breakdown.kappa_term = n * kappa;
  out.breakdown.ec_cost = n * ec_leakage_rate(stats, params.f_ec);
  out.breakdown.ec_validation_cost = std::ceil(std::log2(1.0 / params.eps_ec));
  out.breakdown.pa_cost =
      (params.alpha / (params.alpha - 1.0)) * std::log2(1.0 / params.eps_pa);
  out.breakdown.constant = 2.0;
  out.expected_length = std::max(0.0, out.breakdown.total());
  out.rate_per_pulse = out.expected_length / n;
  return out;
}

KeyRateResult key_rate(const ProtocolParams& params, const KeyRateProblem& prob,
                       const ClickStatistics& stats) {
  return evaluate_point(params, prob, stats, nullptr, nullptr);
}

KeyRateResult key_rate(const ProtocolParams& params) {
  validate(params);
  const KeyRateProblem prob = make_problem(params);
  return key_rate(params, prob, honest_statistics(params));
}

KeyRateResult optimize_alpha(const ProtocolParams& params,
                             const KeyRateProblem& prob,
                             const ClickStatistics& stats,
                             const AlphaSearch& search) {
  if (!(search.lo > 0.0) || !(search.hi >= search.lo) || !(search.hi < 1.0))
    throw std::invalid_argument(
        "optimize_alpha: bracket must satisfy 0 < lo <= hi < 1");

  ProtocolParams p = params;
  Matrix warm;
  bool have_warm = false;
  KeyRateResult best;
  double best_rate = -1.0;

  auto eval = [&](double alpha_minus_one) {
    p.alpha = 1.0 + alpha_minus_one;
    Matrix omega;
    KeyRateResult r =
        evaluate_point(p, prob, stats, have_warm ? &warm : nullptr, &omega);
    if (omega.size() > 0) {
      warm = std::move(omega);
      have_warm = true;
    }
    // Ties go to a certified result: a clamp-to-zero point with converged
    // solves must not be shadowed by a failed solve that also reports zero.
    if (r.rate_per_pulse > best_rate ||
        (r.rate_per_pulse == best_rate && r.certified() && !best.certified())) {
      best_rate = r.rate_per_pulse;
      best = r;
    }
    return r.rate_per_pulse;
  };

  if (search.hi <= search.lo) {
    eval(search.lo);
    return best;
  }

  // Coarse log-spaced scan to localize the peak, then golden-section inside
  // the two surrounding cells. The rate is empirically unimodal in
  // log(alpha - 1); if that ever failed, the scan still anchors the bracket
  // at the best sampled cell and the result stays a valid lower bound.
  const int m = std::max(2, search.coarse_points);
  const double llo = std::log(search.lo);
  const double lhi = std::log(search.hi);
  std::vector<double> grid(m);
  int best_idx = 0;
  double best_coarse = -1.0;
  for (int i = 0; i < m; ++i) {
    grid[i] = llo + (lhi - llo) * i / (m - 1);
    const double v = eval(std::exp(grid[i]));
    if (v > best_coarse) {
      best_coarse = v;
      best_idx = i;
    }
  }

  // Nothing for golden section to refine when every coarse sample is dead:
  // the maximum of zeros is zero, and the result must only be the best
  // evaluated point.
  if (best_coarse <= 0.0) return best;

  double a = grid[std::max(0, best_idx - 1)];
  double b = grid[std::min(m - 1, best_idx + 1)];
  double t1 = b - kInvGolden * (b - a);
  double t2 = a + kInvGolden * (b - a);
  double f1 = eval(std::exp(t1));
  double f2 = eval(std::exp(t2));
  for (int it = 0; it < search.golden_iterations; ++it) {
    if (f1 >= f2) {
      b = t2;
      t2 = t1;
      f2 = f1;
      t1 = b - kInvGolden * (b - a);
      f1 = eval(std::exp(t1));
    } else {
      a = t1;
      t1 = t2;
      f1 = f2;
      t2 = a + kInvGolden * (b - a);
      f2 = eval(std::exp(t2));
    }
  }
  return best;
}

KeyRateResult optimize_alpha(const ProtocolParams& params,
                             const AlphaSearch& search) {
  validate(params);
  const KeyRateProblem prob = make_problem(params);
  return optimize_alpha(params, prob, honest_statistics(params), search);
}

ModulationResult optimize_modulation(const ProtocolParams& params,
                                     const ModulationSearch& search) {
  validate(params);
  if (!(search.beta_lo > 0.0) || !(search.beta_hi >= search.beta_lo))
    throw std::invalid_argument("optimize_modulation: bad beta box");
  if (!(search.pk_lo > 0.0) || !(search.pk_hi >= search.pk_lo) ||
      !(search.pk_hi < 1.0))
    throw std::invalid_argument("optimize_modulation: bad p_k box");

  auto clamp_beta = [&](double b) {
    return std::clamp(b, search.beta_lo, search.beta_hi);
  };
  auto clamp_pk = [&](double k) {
    return std::clamp(k, search.pk_lo, search.pk_hi);
  };

  auto alpha_opt_at = [&](double beta, double pk,
                          const AlphaSearch& as) -> KeyRateResult {
    ProtocolParams p = params;
    p.beta = beta;
    p.p_k = pk;
    const KeyRateProblem prob = make_problem(p);
    return optimize_alpha(p, prob, honest_statistics(p), as);
  };

  // Vertices repeat when the box clamp pins the simplex to an edge; the memo
  // keeps those re-visits free and order-independent.
  std::map<std::pair<double, double>, double> memo;
  int evals_left = std::max(1, search.max_evaluations);
  double global_rate = -1.0;
  double global_beta = clamp_beta(search.beta_start);
  double global_pk = clamp_pk(search.pk_start);

  auto eval = [&](double beta, double pk) -> double {
    beta = clamp_beta(beta);
    pk = clamp_pk(pk);
    const auto key = std::make_pair(beta, pk);
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    const KeyRateResult r = alpha_opt_at(beta, pk, search.nested);
    --evals_left;
    memo.emplace(key, r.rate_per_pulse);
    if (r.rate_per_pulse > global_rate) {
      global_rate = r.rate_per_pulse;
      global_beta = beta;
      global_pk = pk;
    }
    return r.rate_per_pulse;
  };

  struct Vertex {
    double beta, pk, rate;
  };
  const double b0 = clamp_beta(search.beta_start);
  const double k0 = clamp_pk(search.pk_start);
  const double db = std::min(0.08, 0.25 * (search.beta_hi - search.beta_lo));
  const double dk = std::min(0.03, 0.25 * (search.pk_hi - search.pk_lo));
  const double b1 = (b0 + db <= search.beta_hi) ? b0 + db : b0 - db;
  const double k1 = (k0 + dk <= search.pk_hi) ? k0 + dk : k0 - dk;
  std::vector<Vertex> v = {{b0, k0, eval(b0, k0)},
                           {b1, k0, eval(b1, k0)},
                           {b0, k1, eval(b0, k1)}};

  // A simplex that starts on a zero-rate plateau has nothing to follow, and
  // positive regions can be islands (small blocks favor heavy testing, far
  // from the usual p_k). Seed from a fixed coarse lattice in that case and
  // restart the simplex around the best positive cell if one shows up.
  if (global_rate <= 0.0) {
    for (const double bg : {0.25, 0.45, 0.65, 0.85})
      for (const double kg : {0.6, 0.75, 0.875, 0.95}) eval(bg, kg);
    if (global_rate > 0.0) {
      const double rb = global_beta;
      const double rk = global_pk;
      const double rb1 =
          (rb + 0.5 * db <= search.beta_hi) ? rb + 0.5 * db : rb - 0.5 * db;
      const double rk1 =
          (rk + 0.5 * dk <= search.pk_hi) ? rk + 0.5 * dk : rk - 0.5 * dk;
      v = {{rb, rk, eval(rb, rk)},
           {rb1, rk, eval(rb1, rk)},
           {rb, rk1, eval(rb, rk1)}};
    }
  }

  while (evals_left >= 4) {
    std::stable_sort(v.begin(), v.end(),
                     [](const Vertex& x, const Vertex& y) { return x.rate > y.rate; });
    const double spread =
        std::max({std::abs(v[1].beta - v[0].beta), std::abs(v[2].beta - v[0].beta),
                  std::abs(v[1].pk - v[0].pk), std::abs(v[2].pk - v[0].pk)});
    if (spread < search.simplex_tol) break;

    const double cb = 0.5 * (v[0].beta + v[1].beta);
    const double ck = 0.5 * (v[0].pk + v[1].pk);
    const double rb = clamp_beta(cb + (cb - v[2].beta));
    const double rk = clamp_pk(ck + (ck - v[2].pk));
    const double fr = eval(rb, rk);

    if (fr > v[0].rate) {
      const double eb = clamp_beta(cb + 2.0 * (cb - v[2].beta));
      const double ek = clamp_pk(ck + 2.0 * (ck - v[2].pk));
      const double fe = eval(eb, ek);
      v[2] = (fe > fr) ? Vertex{eb, ek, fe} : Vertex{rb, rk, fr};
    } else if (fr > v[1].rate) {
      v[2] = {rb, rk, fr};
    } else {
      const bool outside = fr > v[2].rate;
      const double sb = outside ? cb + 0.5 * (cb - v[2].beta)
                                : cb - 0.5 * (cb - v[2].beta);
      const double sk = outside ? ck + 0.5 * (ck - v[2].pk)
                                : ck - 0.5 * (ck - v[2].pk);
      const double cbeta = clamp_beta(sb);
      const double cpk = clamp_pk(sk);
      const double fc = eval(cbeta, cpk);
      if (fc > (outside ? fr : v[2].rate)) {
        v[2] = {cbeta, cpk, fc};
      } else {
        for (int i = 1; i < 3; ++i) {
          v[i].beta = clamp_beta(v[0].beta + 0.5 * (v[i].beta - v[0].beta));
          v[i].pk = clamp_pk(v[0].pk + 0.5 * (v[i].pk - v[0].pk));
          v[i].rate = eval(v[i].beta, v[i].pk);
        }
      }
    }
  }

  // Full-quality polish: the starting point first (so the default modulation
  // can never beat the returned result), then the simplex winner.
  ModulationResult out;
  out.params = params;
  out.params.beta = b0;
  out.params.p_k = k0;
  out.result = alpha_opt_at(b0, k0, search.polish);
  if (global_beta != b0 || global_pk != k0) {
    const KeyRateResult win = alpha_opt_at(global_beta, global_pk, search.polish);
    if (win.rate_per_pulse > out.result.rate_per_pulse) {
      out.result = win;
      out.params.beta = global_beta;
      out.params.p_k = global_pk;
    }
  }
  out.params.alpha = out.result.alpha_used;
  return out;
}

TimingCheck timing_feasibility(double distance_m, double channel_light_speed,
                               double pulse_period_s) {
  if (!(distance_m >= 0.0) || !std::isfinite(distance_m))
    throw std::invalid_argument("timing_feasibility: distance must be >= 0");
  if (!(channel_light_speed > 0.0 &&
        channel_light_speed <= kVacuumLightSpeed))
    throw std::invalid_argument(
        "timing_feasibility: light speed must lie in (0, 3e8] m/s");
  TimingCheck out;
  out.min_period_s =
      distance_m * (1.0 / channel_light_speed - 1.0 / kVacuumLightSpeed);
  out.feasible = pulse_period_s >= out.min_period_s;
  return out;
}

}  // namespace dpsk
