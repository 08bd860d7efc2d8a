#pragma once

#include <vector>

#include "dpskrate/hermitian.hpp"

namespace dpsk {

// Threshold click/no-click POVM on two truncated Fock modes S', R'.
// The carrier space keeps up to n_max photons per mode; the elements cover
// the physical events with total photon number at most n_max, so they sum to
// the projector onto that subspace rather than the carrier identity.
struct ThresholdPOVM {
  int n_max = 0;
  HermitianOperator m_bot;   // no photons anywhere
  HermitianOperator m_zero;  // all photons in S'
  HermitianOperator m_one;   // all photons in R'
  HermitianOperator m_dc;    // photons in both arms (double click)

  // Projector onto the total-photon-number <= n_max subspace; the elements
  // sum to exactly this.
  HermitianOperator support() const;
};

ThresholdPOVM build_threshold_povm(int n_max);

// Three-outcome POVM after mixing dark counts into the threshold elements.
// Double clicks are reassigned uniformly, which is what the 1/2 weights in
// the transform encode; no separate stochastic step exists.
struct DarkThresholdPOVM {
  double pd0 = 0.0;
  double pd1 = 0.0;
  HermitianOperator m_bot;
  HermitianOperator m_zero;
  HermitianOperator m_one;
};

DarkThresholdPOVM apply_dark_counts(const ThresholdPOVM& povm, double pd0,
                                    double pd1);

// Squashed two-qubit POVM on S (x) R with symmetric dark counts folded in.
struct SquashedPOVM {
  double dark_count = 0.0;
  HermitianOperator n_bot;
  HermitianOperator n_zero;
  HermitianOperator n_one;
  HermitianOperator n_top;  // n_zero + n_one
};

SquashedPOVM build_squashed_povm(double p_d);

// Parameter-estimation operators on A (x) S (x) R for the announced symbols
// CC, WC, NC. Key rounds carry the complementary weight p_k * (I_A (x) n_top).
struct GammaOperators {
  double p_k = 0.0;
  double p_d = 0.0;
  HermitianOperator gamma_cc;
  HermitianOperator gamma_wc;
  HermitianOperator gamma_nc;
};

GammaOperators build_gamma_operators(double p_k, double p_d);

// Facially reduced key map: a single Kraus operator from A (x) S (x) R to the
// output register, plus the pinching projectors over Alice's bit on that
// output. For p_d > 0 the reduction only rescales the |00> direction and the
// output stays 8-dimensional; for p_d = 0 Bob's no-click direction drops out
// entirely and the output is A (x) K with dim 6.
struct KeySuperoperator {
  double p_d = 0.0;
  RegisterSignature in_sig;
  RegisterSignature out_sig;
  Matrix kraus;  // out_dim x in_dim
  std::vector<HermitianOperator> pinch_projectors;

  Matrix apply(const Matrix& omega) const;  // kraus * omega * kraus^dag
  Matrix pinch(const Matrix& tau) const;    // sum_x P_x tau P_x
};

KeySuperoperator build_key_superoperator(double p_d);

// Alice's fixed 2x2 marginal for signal amplitudes (-beta, gamma_mod * beta).
struct AliceMarginal {
  double beta = 0.0;
  double gamma_mod = 1.0;
  HermitianOperator sigma_a;
};

AliceMarginal build_alice_marginal(double beta, double gamma_mod);

// Overlap <a|b> = exp(-(a^2+b^2)/2 + a*b) of coherent states with real
// amplitudes.
double coherent_overlap(double a, double b);

}  // namespace dpsk
