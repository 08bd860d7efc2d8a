#pragma once

#include "dpskrate/outcome.hpp"
#include "dpskrate/params.hpp"

namespace dpsk {

// Fiber channel with excess noise: each arm arrives as a displaced thermal
// state with transmittance eta and thermal mean photon number n_thermal.
//
// The thermal parameter follows the shot-noise convention: total quadrature
// variance 1 + xi*eta corresponds to n_thermal = xi*eta/2, which is the only
// choice that collapses to a pure coherent state at xi = 0. Setting
// variance_literal uses the raw variance 1 + xi*eta in the thermal-parameter
// slot instead, for comparison runs; it does not have the coherent limit.
struct ChannelModel {
  double eta = 1.0;
  double xi = 0.0;
  double n_thermal = 0.0;
  int n_max = 40;
  bool variance_literal = false;
};

ChannelModel channel_from_eta(double eta, double xi, int n_max = 40);
ChannelModel channel_from_loss_db(double chi_db, double xi, int n_max = 40);

// Announcement distribution of the honest implementation.
struct ClickStatistics {
  double q_bot = 0.0;
  double q_cc = 0.0;
  double q_wc = 0.0;
  double q_nc = 0.0;
  double qber = 0.0;     // q_wc / (q_cc + q_wc), 0 when no clicks
  double p_click = 0.0;  // 1 - q_nc

  double q(Outcome c) const {
    switch (c) {
      case Outcome::bot: return q_bot;
      case Outcome::cc: return q_cc;
      case Outcome::wc: return q_wc;
      case Outcome::nc: return q_nc;
    }
    return 0.0;
  }
};

// Number-basis matrix element <m| D(sqrt(eta)*amplitude) rho_thermal
// D^dag(...) |n> of the arriving state. Real for real amplitudes; evaluated
// in log domain so large m, n stay finite.
double displaced_thermal_element(int m, int n, double amplitude,
                                 const ChannelModel& model);

// Announcement distribution for the asymmetric DPSK source: Alice sends
// signal amplitude -beta or gamma_mod*beta against a -beta reference, both
// arms interfere on a balanced beam splitter feeding two threshold detectors
// with dark counts. Escalates the Fock truncation when the per-arm trace
// tail exceeds 1e-12 and fails loudly if that never converges.
ClickStatistics click_statistics(const ProtocolParams& params,
                                 const ChannelModel& model);

// Per-round error-correction leakage f_ec * p_k * p_click * h2(qber).
double ec_leakage_rate(const ClickStatistics& stats, double f_ec);

// Binary entropy in bits; 0 at both endpoints.
double binary_entropy(double p);

}  // namespace dpsk
