#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpskrate/engine.hpp"

using namespace dpsk;

namespace {

ProtocolParams at_channel(double chi_db, double p_d = 0.0) {
  ProtocolParams p;
  p.chi_db = chi_db;
  p.p_d = p_d;
  return p;
}

ClickStatistics stats_for(const ProtocolParams& p) {
  return click_statistics(p, channel_from_loss_db(p.chi_db, p.xi, p.n_max));
}

std::string validation_message(const ProtocolParams& p) {
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("penalty arithmetic matches the protocol epsilons") {
  ClickStatistics q;
  q.q_bot = 0.25;
  q.q_cc = 0.25;
  q.q_wc = 0.25;
  q.q_nc = 0.25;
  q.qber = 0.5;
  q.p_click = 0.75;
  TradeoffFunction f;
  f.bot = 0.5;
  f.cc = -1.0;
  f.wc = 2.0;
  f.nc = 0.25;
  f.origin = TradeoffFunction::Origin::user_supplied;

  ProtocolParams p;
  p.n = 1000;
  p.alpha = 1.1;
  const KeyRateResult r = expected_key_length(p, f, 0.125, q);

  // The two protocol failure probabilities enter as fixed bit penalties.
  CHECK(r.breakdown.ec_validation_cost == 37.0);
  CHECK(std::abs(r.breakdown.pa_cost - 11.0 * std::log2(1.0 / 9e-11)) <= 1e-12);

  CHECK(r.breakdown.fq_term == 1000.0 * dot(f, q));
  CHECK(r.breakdown.kappa_term == 1000.0 * 0.125);
  CHECK(r.breakdown.ec_cost == 1000.0 * ec_leakage_rate(q, p.f_ec));
  CHECK(r.breakdown.constant == 2.0);
  CHECK(r.expected_length == std::max(0.0, r.breakdown.total()));
  CHECK(r.rate_per_pulse == r.expected_length / 1000.0);
  CHECK(r.alpha_used == 1.1);

  // Epsilons chosen so the binary arithmetic is exact end to end.
  p.alpha = 1.5;
  p.eps_pa = 0.25;
  p.eps_ec = 0.25;
  const KeyRateResult exact = expected_key_length(p, f, 0.0, q);
  CHECK(exact.breakdown.pa_cost == 6.0);
  CHECK(exact.breakdown.ec_validation_cost == 2.0);
}

TEST_CASE("the length bound clamps at zero when penalties dominate") {
  ProtocolParams p = at_channel(10.0);
  p.n = 200;
  const KeyRateResult r = key_rate(p);
  CHECK(r.certified());
  CHECK(r.breakdown.total() < 0.0);
  CHECK(r.expected_length == 0.0);
  CHECK(r.rate_per_pulse == 0.0);
}

TEST_CASE("breakdown terms rebuild the certified length") {
  const ProtocolParams p = at_channel(10.0);
  const KeyRateResult r = key_rate(p);
  REQUIRE(r.certified());
  CHECK(r.rate_per_pulse > 0.0);

  const ClickStatistics q = stats_for(p);
  const double n = static_cast<double>(p.n);
  CHECK(r.breakdown.fq_term == n * dot(r.f, q));
  CHECK(r.breakdown.kappa_term == n * r.kappa);
  CHECK(r.breakdown.ec_cost == n * ec_leakage_rate(q, p.f_ec));
  CHECK(r.expected_length == std::max(0.0, r.breakdown.total()));
  CHECK(r.rate_per_pulse == r.expected_length / n);
  CHECK(r.f.origin == TradeoffFunction::Origin::dual_extracted);
}

TEST_CASE("block size only helps when the index is retuned") {
  ProtocolParams p = at_channel(10.0);
  const KeyRateProblem prob = make_problem(p);
  const ClickStatistics q = stats_for(p);
  const AlphaSearch search{1e-5, 0.5, 5, 12};

  double last_rate = -1.0;
  double last_alpha = 2.0;
  for (const std::int64_t n : {100000LL, 1000000LL, 10000000LL}) {
    p.n = n;
    const KeyRateResult r = optimize_alpha(p, prob, q, search);
    CAPTURE(n);
    CHECK(r.rate_per_pulse >= last_rate);
    if (r.rate_per_pulse > 0.0) {
      // Larger blocks tolerate an index closer to one. Zero-rate points are
      // excluded: their winning index is a tie among rate-0 candidates.
      CHECK(r.alpha_used <= last_alpha + 1e-12);
      last_alpha = r.alpha_used;
    }
    last_rate = r.rate_per_pulse;

    // The search dominates any fixed index choice it has evaluated around.
    p.alpha = 1.05;
    const KeyRateResult fixed = key_rate(p, prob, q);
    CHECK(r.rate_per_pulse >= fixed.rate_per_pulse - 1e-12);
  }
}

TEST_CASE("dark counts and loss only hurt") {
  ProtocolParams p = at_channel(10.0);

  double last = 2.0;
  for (const double pd : {0.0, 1e-5, 1e-4}) {
    p.p_d = pd;
    const KeyRateResult r = key_rate(p);
    CAPTURE(pd);
    CHECK(r.rate_per_pulse <= last);
    last = r.rate_per_pulse;
  }

  p.p_d = 0.0;
  last = 2.0;
  for (const double chi : {10.0, 15.0, 20.0}) {
    p.chi_db = chi;
    const KeyRateResult r = key_rate(p);
    CAPTURE(chi);
    CHECK(r.rate_per_pulse <= last);
    last = r.rate_per_pulse;
  }
}

TEST_CASE("a zero tradeoff function never beats the optimized point") {
  ProtocolParams p = at_channel(10.0);
  p.n = 10000000;
  const KeyRateProblem prob = make_problem(p);
  const ClickStatistics q = stats_for(p);

  const KeyRateResult opt = optimize_alpha(p, prob, q, {1e-5, 0.5, 5, 10});
  REQUIRE(opt.rate_per_pulse > 0.0);

  const TradeoffFunction zero;
  for (const double alpha : {1.1, 1.3}) {
    const KappaSolution ks = solve_kappa(zero, alpha, prob);
    p.alpha = alpha;
    const KeyRateResult plain = expected_key_length(p, zero, ks.kappa, q);
    CAPTURE(alpha);
    CHECK(plain.expected_length <= opt.expected_length + 1e-9);
  }
}

TEST_CASE("uncertified solves zero the rate and keep the reports") {
  ProtocolParams p = at_channel(10.0);
  p.alpha = 1.0 + 1e-5;  // needs more centering precision than doubles have
  const KeyRateResult r = key_rate(p);
  CHECK_FALSE(r.certified());
  CHECK(r.expected_length == 0.0);
  CHECK(r.rate_per_pulse == 0.0);
  CHECK(r.f.origin == TradeoffFunction::Origin::zero);
  const bool flagged = r.reports.tradeoff.status != SolveStatus::converged ||
                       r.reports.kappa.status != SolveStatus::converged;
  CHECK(flagged);
}

TEST_CASE("the modulation search stays in its box and dominates the default") {
  ProtocolParams p = at_channel(8.0);
  p.n = 1000000;

  ModulationSearch search;
  search.max_evaluations = 8;
  search.nested = {1e-5, 0.5, 4, 5};
  search.polish = {1e-5, 0.5, 5, 8};
  const ModulationResult mod = optimize_modulation(p, search);

  CHECK(mod.params.beta >= search.beta_lo);
  CHECK(mod.params.beta <= search.beta_hi);
  CHECK(mod.params.p_k >= search.pk_lo);
  CHECK(mod.params.p_k <= search.pk_hi);
  CHECK(mod.params.alpha == mod.result.alpha_used);
  CHECK(mod.result.alpha_used > 1.0);
  CHECK(mod.result.alpha_used < 2.0);

  // The polish step re-runs the starting point with the same budget, so the
  // default modulation can never win.
  const KeyRateResult base = optimize_alpha(p, search.polish);
  CHECK(mod.result.rate_per_pulse >= base.rate_per_pulse);
}

TEST_CASE("timing feasibility reproduces the fiber bound") {
  const TimingCheck fiber = timing_feasibility(5e4, 2e8, 1e-4);
  CHECK(fiber.min_period_s == 8.333333333333333e-05);
  CHECK(fiber.feasible);
  CHECK_FALSE(timing_feasibility(5e4, 2e8, 8e-5).feasible);

  const TimingCheck vacuum = timing_feasibility(1e7, 3e8, 0.0);
  CHECK(vacuum.min_period_s == 0.0);
  CHECK(vacuum.feasible);
  CHECK(timing_feasibility(0.0, 1e8, 0.0).feasible);

  CHECK_THROWS_AS(timing_feasibility(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(timing_feasibility(1.0, 3.1e8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(timing_feasibility(-1.0, 2e8, 1.0), std::invalid_argument);
}

TEST_CASE("parameter validation names the offending field") {
  const ProtocolParams good;
  CHECK(validation_message(good) == "");

  auto field_case = [](auto&& tweak) {
    ProtocolParams p;
    tweak(p);
    return validation_message(p);
  };
  CHECK(field_case([](ProtocolParams& p) { p.beta = 0.0; }) ==
        "ProtocolParams: beta out of range");
  CHECK(field_case([](ProtocolParams& p) { p.gamma_mod = -2.0; }) ==
        "ProtocolParams: gamma_mod out of range");
  CHECK(field_case([](ProtocolParams& p) { p.p_k = 1.0; }) ==
        "ProtocolParams: p_k out of range");
  CHECK(field_case([](ProtocolParams& p) { p.p_d = 1.0; }) ==
        "ProtocolParams: p_d out of range");
  CHECK(field_case([](ProtocolParams& p) { p.chi_db = -0.1; }) ==
        "ProtocolParams: chi_db out of range");
  CHECK(field_case([](ProtocolParams& p) { p.xi = -1e-9; }) ==
        "ProtocolParams: xi out of range");
  CHECK(field_case([](ProtocolParams& p) { p.f_ec = 0.999; }) ==
        "ProtocolParams: f_ec out of range");
  CHECK(field_case([](ProtocolParams& p) { p.n = 0; }) ==
        "ProtocolParams: n out of range");
  CHECK(field_case([](ProtocolParams& p) { p.eps_ec = 0.0; }) ==
        "ProtocolParams: eps_ec out of range");
  CHECK(field_case([](ProtocolParams& p) { p.eps_pa = 1.5; }) ==
        "ProtocolParams: eps_pa out of range");
  CHECK(field_case([](ProtocolParams& p) { p.alpha = 2.0; }) ==
        "ProtocolParams: alpha out of range");
  CHECK(field_case([](ProtocolParams& p) { p.n_max = 0; }) ==
        "ProtocolParams: n_max out of range");

  // The first offending field in declaration order wins.
  CHECK(field_case([](ProtocolParams& p) {
          p.beta = -1.0;
          p.alpha = 5.0;
        }) == "ProtocolParams: beta out of range");

  const ProtocolParams base;
  CHECK_THROWS_AS(optimize_alpha(base, AlphaSearch{0.0, 0.5, 7, 12}),
                  std::invalid_argument);
  CHECK_THROWS_AS(optimize_alpha(base, AlphaSearch{1e-5, 1.0, 7, 12}),
                  std::invalid_argument);
  ModulationSearch bad;
  bad.pk_hi = 1.0;
  CHECK_THROWS_AS(optimize_modulation(base, bad), std::invalid_argument);
}
