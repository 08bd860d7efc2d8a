#pragma once

#include <vector>

#include "dpskrate/channel.hpp"
#include "dpskrate/hermitian.hpp"
#include "dpskrate/measurement.hpp"
#include "dpskrate/outcome.hpp"

namespace dpsk {

// Weighting over the announcement alphabet. Any finite choice gives a valid
// key-rate bound; the solver's extracted choice merely maximizes it.
struct TradeoffFunction {
  enum class Origin { zero, dual_extracted, user_supplied };

  double bot = 0.0;
  double cc = 0.0;
  double wc = 0.0;
  double nc = 0.0;
  Origin origin = Origin::zero;

  double value(Outcome c) const {
    switch (c) {
      case Outcome::bot: return bot;
      case Outcome::cc: return cc;
      case Outcome::wc: return wc;
      case Outcome::nc: return nc;
    }
    return 0.0;
  }
};

// f weighted by the announcement distribution, sum_c f(c) q(c).
double dot(const TradeoffFunction& f, const ClickStatistics& stats);

// Classical KL divergence sum_i p_i log2(p_i / q_i) with 0 log 0 = 0.
// Probability mass of p outside q's support makes the answer +infinity.
double kl_divergence(const std::vector<double>& p,
                     const std::vector<double>& q);

// Sandwiched Renyi divergence in bits,
//   D_alpha(rho || sigma) = (1/(alpha-1)) log2(Psi_alpha(rho,sigma)/tr rho).
// For alpha > 1 a support violation means the true value is infinite and
// +infinity is returned; for alpha < 1 the projected value is the value.
double sandwiched_divergence(const DensityMatrix& rho,
                             const DensityMatrix& sigma, double alpha);

// Lower bound on the key register's conditional Renyi entropy at index
// alpha = 1/gamma: the divergence between the key-mapped state and its
// pinched version. A zero-probability key round makes the bound vacuous and
// returns +infinity.
double entropy_lower_bound(const DensityMatrix& omega,
                           const KeySuperoperator& key_map, double gamma);

// The certified per-round entropy bound for a given tradeoff function:
//   (alpha/(1-alpha)) * log2( sum_c tr[Gamma^c omega] 2^{((alpha-1)/alpha) f(c)}
//                             + p_k 2^{((alpha-1)/alpha) f(bot)}
//                               * Psi_gamma(G omega G^dag, pinched) ).
double fweighted_objective(const DensityMatrix& omega,
                           const TradeoffFunction& f, double alpha,
                           const GammaOperators& gammas,
                           const KeySuperoperator& key_map, double p_k);

}  // namespace dpsk
