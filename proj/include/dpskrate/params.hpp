#pragma once

#include <cmath>
#include <cstdint>

namespace dpsk {

// Every scalar knob of a protocol run. chi_db is the canonical loss figure;
// eta() derives the transmittance from it.
struct ProtocolParams {
  double beta = 0.45;       // signal amplitude
  double gamma_mod = 1.0;   // asymmetry factor; signal amplitudes (-beta, gamma_mod*beta)
  double p_k = 0.96;        // key-round probability
  double p_d = 0.0;         // dark count probability per detector
  double chi_db = 10.0;     // channel loss in dB
  double xi = 0.005;        // excess noise, shot-noise units
  double f_ec = 1.1;        // error-correction inefficiency
  std::int64_t n = 100000000;  // number of rounds
  double eps_ec = 1e-11;    // error-correction failure probability
  double eps_pa = 9e-11;    // privacy-amplification failure probability
  double alpha = 1.05;      // Renyi index
  int n_max = 40;           // Fock truncation per mode

  double eta() const { return std::pow(10.0, -chi_db / 10.0); }
};

// Throws std::invalid_argument naming the first field out of range.
void validate(const ProtocolParams& p);

}  // namespace dpsk
