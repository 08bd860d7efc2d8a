#include "dpskrate/measurement.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dpsk {
namespace {

RegisterSignature fock_pair_sig(int n_max) {
  const int d = n_max + 1;
  return make_signature({"S'", "R'"}, {d, d});
}

RegisterSignature qubit_pair_sig() { return make_signature({"S", "R"}, {2, 2}); }

RegisterSignature asr_sig() {
  return make_signature({"A", "S", "R"}, {2, 2, 2});
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0,1], got " +
                                std::to_string(p));
}

void check_dark_count(double p_d) {
  if (!(p_d >= 0.0) || !(p_d < 1.0))
    throw std::invalid_argument("dark count must lie in [0,1), got " +
                                std::to_string(p_d));
}

}  // namespace

HermitianOperator ThresholdPOVM::support() const {
  return make_hermitian(m_bot.sig, m_bot.mat + m_zero.mat + m_one.mat + m_dc.mat);
}

ThresholdPOVM build_threshold_povm(int n_max) {
  if (n_max < 1)
    throw std::invalid_argument("threshold POVM needs n_max >= 1, got " +
                                std::to_string(n_max));
  const int d = n_max + 1;
  const RegisterSignature sig = fock_pair_sig(n_max);
  const auto idx = [d](int s, int r) { return s * d + r; };

  Matrix bot = Matrix::Zero(d * d, d * d);
  Matrix zero = bot, one = bot, dc = bot;

  bot(idx(0, 0), idx(0, 0)) = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    zero(idx(n, 0), idx(n, 0)) = 1.0;
    one(idx(0, n), idx(0, n)) = 1.0;
  }
  // Both detectors fire: at least one photon per arm, n_max total.
  for (int total = 2; total <= n_max; ++total)
    for (int r = 1; r < total; ++r)
      dc(idx(total - r, r), idx(total - r, r)) = 1.0;

  ThresholdPOVM out;
  out.n_max = n_max;
  out.m_bot = make_hermitian(sig, bot);
  out.m_zero = make_hermitian(sig, zero);
  out.m_one = make_hermitian(sig, one);
  out.m_dc = make_hermitian(sig, dc);
  return out;
}

DarkThresholdPOVM apply_dark_counts(const ThresholdPOVM& povm, double pd0,
                                    double pd1) {
  check_probability(pd0, "pd0");
  check_probability(pd1, "pd1");

  const Matrix& bot = povm.m_bot.mat;
  const Matrix& m0 = povm.m_zero.mat;
  const Matrix& m1 = povm.m_one.mat;
  const Matrix& dc = povm.m_dc.mat;

  DarkThresholdPOVM out;
  out.pd0 = pd0;
  out.pd1 = pd1;
  out.m_bot = make_hermitian(povm.m_bot.sig, (1.0 - pd0) * (1.0 - pd1) * bot);
  out.m_zero = make_hermitian(
      povm.m_bot.sig, pd0 * (1.0 - pd1 / 2) * bot + (1.0 - pd1 / 2) * m0 +
                          (pd0 / 2) * m1 + 0.5 * dc);
  out.m_one = make_hermitian(
      povm.m_bot.sig, pd1 * (1.0 - pd0 / 2) * bot + (pd1 / 2) * m0 +
                          (1.0 - pd0 / 2) * m1 + 0.5 * dc);
  return out;
}

SquashedPOVM build_squashed_povm(double p_d) {
  check_dark_count(p_d);
  const RegisterSignature sig = qubit_pair_sig();

  // Basis order |sr>: 00, 01, 10, 11.
  Matrix phi_plus = Matrix::Zero(4, 4), phi_minus = Matrix::Zero(4, 4);
  phi_plus(1, 1) = phi_plus(2, 2) = 0.5;
  phi_plus(1, 2) = phi_plus(2, 1) = 0.5;
  phi_minus(1, 1) = phi_minus(2, 2) = 0.5;
  phi_minus(1, 2) = phi_minus(2, 1) = -0.5;

  Matrix p11 = Matrix::Zero(4, 4);
  p11(3, 3) = 1.0;
  Matrix p00 = Matrix::Zero(4, 4);
  p00(0, 0) = 1.0;

  const Matrix n0 = phi_plus + 0.5 * p11;
  const Matrix n1 = phi_minus + 0.5 * p11;
  const double t = 1.0 - p_d;

  const Matrix id = Matrix::Identity(4, 4);
  const Matrix nb0 = 0.5 * id - (t * t / 2) * p00 + (t / 2) * (n0 - n1);
  const Matrix nb1 = 0.5 * id - (t * t / 2) * p00 - (t / 2) * (n0 - n1);

  SquashedPOVM out;
  out.dark_count = p_d;
  out.n_bot = make_hermitian(sig, t * t * p00);
  out.n_zero = make_hermitian(sig, nb0);
  out.n_one = make_hermitian(sig, nb1);
  out.n_top = make_hermitian(sig, id - t * t * p00);
  return out;
}

GammaOperators build_gamma_operators(double p_k, double p_d) {
  check_probability(p_k, "p_k");
  const SquashedPOVM sq = build_squashed_povm(p_d);
  const RegisterSignature sig = asr_sig();

  const Matrix p0 = basis_projector(2, 0);
  const Matrix p1 = basis_projector(2, 1);

  const Matrix cc =
      (1.0 - p_k) * (kron(p0, sq.n_zero.mat) + kron(p1, sq.n_one.mat));
  const Matrix wc =
      (1.0 - p_k) * (kron(p0, sq.n_one.mat) + kron(p1, sq.n_zero.mat));
  const Matrix nc = kron(Matrix::Identity(2, 2), sq.n_bot.mat);

  GammaOperators out;
  out.p_k = p_k;
  out.p_d = p_d;
  out.gamma_cc = make_hermitian(sig, cc);
  out.gamma_wc = make_hermitian(sig, wc);
  out.gamma_nc = make_hermitian(sig, nc);
  return out;
}

Matrix KeySuperoperator::apply(const Matrix& omega) const {
  return kraus * omega * kraus.adjoint();
}

Matrix KeySuperoperator::pinch(const Matrix& tau) const {
  Matrix out = Matrix::Zero(tau.rows(), tau.cols());
  for (const HermitianOperator& p : pinch_projectors)
    out += p.mat * tau * p.mat;
  return out;
}

KeySuperoperator build_key_superoperator(double p_d) {
  check_dark_count(p_d);

  KeySuperoperator out;
  out.p_d = p_d;
  out.in_sig = asr_sig();

  if (p_d > 0.0) {
    // Scale the |00> direction down to the dark-count click amplitude; every
    // other direction keeps weight 1, so the map stays square.
    const double s = std::sqrt(2.0 * p_d - p_d * p_d);
    Matrix b = Matrix::Identity(4, 4);
    b(0, 0) = s;
    out.out_sig = asr_sig();
    out.kraus = kron(Matrix::Identity(2, 2), b);
    for (int x = 0; x < 2; ++x)
      out.pinch_projectors.push_back(make_hermitian(
          out.out_sig,
          kron(basis_projector(2, x), Matrix::Identity(4, 4))));
  } else {
    // Without dark counts |00> never produces a key round; drop it and keep
    // the three click directions as the register K.
    Matrix v = Matrix::Zero(3, 4);
    v(0, 1) = 1.0;
    v(1, 2) = 1.0;
    v(2, 3) = 1.0;
    out.out_sig = make_signature({"A", "K"}, {2, 3});
    out.kraus = kron(Matrix::Identity(2, 2), v);
    for (int x = 0; x < 2; ++x)
      out.pinch_projectors.push_back(make_hermitian(
          out.out_sig,
          kron(basis_projector(2, x), Matrix::Identity(3, 3))));
  }
  return out;
}

double coherent_overlap(double a, double b) {
  return std::exp(-(a * a + b * b) / 2 + a * b);
}

AliceMarginal build_alice_marginal(double beta, double gamma_mod) {
  if (!(beta > 0.0))
    throw std::invalid_argument("beta must be positive, got " +
                                std::to_string(beta));
  if (!(gamma_mod > 0.0))
    throw std::invalid_argument("gamma_mod must be positive, got " +
                                std::to_string(gamma_mod));

  const double a0 = -beta;
  const double a1 = gamma_mod * beta;
  Matrix m(2, 2);
  m(0, 0) = m(1, 1) = 0.5;
  m(0, 1) = m(1, 0) = 0.5 * coherent_overlap(a1, a0);

  AliceMarginal out;
  out.beta = beta;
  out.gamma_mod = gamma_mod;
  out.sigma_a = make_hermitian(make_signature({"A"}, {2}), m);
  return out;
}

}  // namespace dpsk
