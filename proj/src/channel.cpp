#include "dpskrate/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpsk {
namespace {

constexpr double kTailTol = 1e-12;
constexpr int kMaxEscalations = 3;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double thermal_parameter(const ChannelModel& model) {
  return model.variance_literal ? 1.0 + model.xi * model.eta
                                : model.n_thermal;
}

// log L_k^{(j)}(-x) for x >= 0. Every series term is positive there, so the
// three-term recurrence is safe; values grow fast enough to need rescaling.
double log_laguerre_neg(int k, int j, double x) {
  if (k == 0) return 0.0;
  double scale = 0.0;
  double prev = 1.0;
  double cur = 1.0 + j + x;
  for (int i = 1; i < k; ++i) {
    const double next =
        ((2.0 * i + 1.0 + j + x) * cur - (i + j) * prev) / (i + 1.0);
    prev = cur;
    cur = next;
    if (cur > 1e250) {
      prev *= 1e-250;
      cur *= 1e-250;
      scale += 250.0 * std::log(10.0);
    }
  }
  return std::log(cur) + scale;
}

ChannelModel checked(ChannelModel m) {
  if (!(m.eta > 0.0) || !(m.eta <= 1.0))
    throw std::invalid_argument("transmittance must lie in (0,1], got " +
                                num(m.eta));
  if (!(m.xi >= 0.0))
    throw std::invalid_argument("excess noise must be nonnegative, got " +
                                num(m.xi));
  if (m.n_max < 1)
    throw std::invalid_argument("Fock truncation must be >= 1, got " +
                                std::to_string(m.n_max));
  m.n_thermal = m.xi * m.eta / 2.0;
  return m;
}

// Square table I[m][n] for one arm at the given signed amplitude.
struct ElementTable {
  int n_max = 0;
  std::vector<double> v;  // (n_max+1)^2, row-major
  double at(int m, int n) const { return v[m * (n_max + 1) + n]; }
  double trace_tail() const {
    double tr = 0.0;
    for (int k = 0; k <= n_max; ++k) tr += at(k, k);
    return 1.0 - tr;
  }
};

ElementTable element_table(double amplitude, const ChannelModel& model) {
  ElementTable t;
  t.n_max = model.n_max;
  const int d = model.n_max + 1;
  t.v.resize(static_cast<size_t>(d) * d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      t.v[m * d + n] = displaced_thermal_element(m, n, amplitude, model);
  return t;
}

struct KahanSum {
  double acc = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double s = acc + y;
    carry = (s - acc) - y;
    acc = s;
  }
};

// Interference term Tr[(post-splitter M^0 - M^1 pullback)(rho_sig x rho_ref)]
// as a double sum over total photon number N: odd-overlap pairs weighted by
// 2^{1-N} sqrt(C(N,m) C(N,n)).
double interference_sum(const ElementTable& sig, const ElementTable& ref,
                        const std::vector<double>& log_fact) {
  KahanSum total;
  int quiet = 0;
  const double ln2 = std::log(2.0);
  for (int bigN = 1; bigN <= sig.n_max; ++bigN) {
    KahanSum layer;
    for (int m = 0; m <= bigN; ++m) {
      const double lcm = log_fact[bigN] - log_fact[m] - log_fact[bigN - m];
      for (int n = (m + 1) % 2; n <= bigN; n += 2) {
        const double lcn = log_fact[bigN] - log_fact[n] - log_fact[bigN - n];
        const double w =
            std::exp(0.5 * (lcm + lcn) - bigN * ln2 + ln2);
        layer.add(w * sig.at(bigN - n, bigN - m) * ref.at(n, m));
      }
    }
    total.add(layer.acc);
    if (std::abs(layer.acc) <
        1e-16 * std::max(std::abs(total.acc), 1e-300)) {
      if (++quiet >= 5) break;
    } else {
      quiet = 0;
    }
  }
  return total.acc;
}

std::vector<double> log_factorials(int up_to) {
  std::vector<double> lf(up_to + 1, 0.0);
  for (int k = 2; k <= up_to; ++k) lf[k] = lf[k - 1] + std::log(double(k));
  return lf;
}

}  // namespace

ChannelModel channel_from_eta(double eta, double xi, int n_max) {
  ChannelModel m;
  m.eta = eta;
  m.xi = xi;
  m.n_max = n_max;
  return checked(m);
}

ChannelModel channel_from_loss_db(double chi_db, double xi, int n_max) {
  if (!(chi_db >= 0.0))
    throw std::invalid_argument("loss must be nonnegative dB, got " +
                                num(chi_db));
  return channel_from_eta(std::pow(10.0, -chi_db / 10.0), xi, n_max);
}

double displaced_thermal_element(int m, int n, double amplitude,
                                 const ChannelModel& model) {
  if (m < 0 || n < 0 || m > model.n_max || n > model.n_max)
    throw std::invalid_argument("Fock index (" + std::to_string(m) + "," +
                                std::to_string(n) + ") outside truncation " +
                                std::to_string(model.n_max));

  const double delta = thermal_parameter(model);
  const double s = std::sqrt(model.eta) * amplitude;
  const double s2 = s * s;
  const int lo = std::min(m, n);
  const int hi = std::max(m, n);
  const int j = hi - lo;
  const double sign = (s < 0.0 && (j % 2 != 0)) ? -1.0 : 1.0;

  if (delta <= 0.0) {
    // Pure coherent state.
    if (s == 0.0) return (m == 0 && n == 0) ? 1.0 : 0.0;
    const double lg = -s2 + 0.5 * (m + n) * std::log(s2) -
                      0.5 * (std::lgamma(m + 1.0) + std::lgamma(n + 1.0));
    return sign * std::exp(lg);
  }

  if (s == 0.0) {
    if (m != n) return 0.0;
    return std::exp(m * std::log(delta) - (m + 1.0) * std::log1p(delta));
  }

  const double x = s2 / (delta * (1.0 + delta));
  const double lg = 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) +
                    lo * std::log(delta) - (hi + 1.0) * std::log1p(delta) +
                    0.5 * j * std::log(s2) - s2 / (1.0 + delta) +
                    log_laguerre_neg(lo, j, x);
  return sign * std::exp(lg);
}

ClickStatistics click_statistics(const ProtocolParams& params,
                                 const ChannelModel& model) {
  if (!(params.p_k > 0.0) || !(params.p_k < 1.0))
    throw std::invalid_argument("p_k must lie in (0,1), got " +
                                num(params.p_k));
  if (!(params.p_d >= 0.0) || !(params.p_d < 1.0))
    throw std::invalid_argument("p_d must lie in [0,1), got " +
                                num(params.p_d));
  if (!(params.beta > 0.0) || !(params.gamma_mod > 0.0))
    throw std::invalid_argument("beta and gamma_mod must be positive");

  ChannelModel work = checked(model);
  ElementTable minus, plus;
  double tail = 0.0;
  for (int attempt = 0;; ++attempt) {
    minus = element_table(-params.beta, work);
    plus = element_table(params.gamma_mod * params.beta, work);
    tail = std::max(minus.trace_tail(), plus.trace_tail());
    if (tail <= kTailTol) break;
    if (attempt >= kMaxEscalations)
      throw std::runtime_error(
          "click statistics did not converge: truncation tail " + num(tail) +
          " at n_max=" + std::to_string(work.n_max));
    work.n_max *= 2;
  }

  const std::vector<double> lf = log_factorials(work.n_max);
  // Bit 0 sends -beta, bit 1 sends gamma_mod*beta; the reference arm is
  // always -beta. Correct clicks for bit 0 land on detector 0.
  const double t0 = interference_sum(minus, minus, lf);
  const double t1 = interference_sum(plus, minus, lf);

  const double pv0 = minus.at(0, 0) * minus.at(0, 0);
  const double pv1 = plus.at(0, 0) * minus.at(0, 0);

  const double t = 1.0 - params.p_d;
  ClickStatistics out;
  out.q_nc = t * t * 0.5 * (pv0 + pv1);
  out.p_click = 1.0 - out.q_nc;
  out.q_bot = params.p_k * out.p_click;

  const double base = 0.5 - (t * t / 4.0) * (pv0 + pv1);
  const double diff = (t / 4.0) * (t0 - t1);
  double cc = (1.0 - params.p_k) * (base + diff);
  double wc = (1.0 - params.p_k) * (base - diff);
  for (double* p : {&cc, &wc}) {
    if (*p < 0.0) {
      if (*p < -1e-10)
        throw std::runtime_error("negative click probability " + num(*p));
      *p = 0.0;
    }
  }
  out.q_cc = cc;
  out.q_wc = wc;
  out.qber = (cc + wc) > 0.0 ? wc / (cc + wc) : 0.0;
  return out;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double ec_leakage_rate(const ClickStatistics& stats, double f_ec) {
  if (!(f_ec >= 1.0))
    throw std::invalid_argument("f_ec must be >= 1, got " + num(f_ec));
  return f_ec * stats.q_bot * binary_entropy(stats.qber);
}

}  // namespace dpsk
