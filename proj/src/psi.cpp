#include "dpskrate/psi.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpsk {
namespace {

struct EigPair {
  Matrix vectors;
  RealVector values;
};

EigPair eigh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psi: eigendecomposition failed to converge");
  return {es.eigenvectors(), es.eigenvalues()};
}

// Spectrum with entries below a relative cut treated as exact zeros, so that
// powers with negative exponents act as pseudo-powers on the support.
RealVector pseudo_pow(const RealVector& values, double exponent, double cut) {
  RealVector out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i)
    out[i] = values[i] > cut ? std::pow(values[i], exponent) : 0.0;
  return out;
}

double support_cut(const RealVector& values) {
  return 1e-12 * std::max(values.cwiseAbs().maxCoeff(), 1e-300);
}

void check_shapes(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != rho.cols() || sigma.rows() != sigma.cols())
    throw std::invalid_argument("psi: operators must be square");
  if (rho.rows() != sigma.rows())
    throw std::invalid_argument(
        "psi: rho is " + std::to_string(rho.rows()) + "x" +
        std::to_string(rho.cols()) + " but sigma is " +
        std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols()));
}

}  // namespace

namespace detail {

PsiValue psi_general(const Matrix& rho, const Matrix& sigma, double index) {
  if (!(index > 0.0) || index == 1.0)
    throw std::invalid_argument("psi: index must lie in (0,1) or (1,inf), got " +
                                std::to_string(index));
  check_shapes(rho, sigma);

  const double c = (1.0 - index) / (2.0 * index);
  const EigPair se = eigh(sigma);
  const double cut = support_cut(se.values);
  const RealVector sc = pseudo_pow(se.values, c, cut);

  const Matrix sigma_c = se.vectors * sc.asDiagonal() * se.vectors.adjoint();
  const Matrix a = symmetrized(sigma_c * symmetrized(rho) * sigma_c);

  PsiValue out;
  const EigPair ae = eigh(a);
  for (Eigen::Index i = 0; i < ae.values.size(); ++i)
    if (ae.values[i] > 0.0) out.value += std::pow(ae.values[i], index);

  // Mass of rho outside sigma's support never reaches the value above; report
  // it so callers can tell a clean evaluation from a clipped one.
  const Matrix rho_s = se.vectors.adjoint() * rho * se.vectors;
  double kept = 0.0;
  for (Eigen::Index i = 0; i < se.values.size(); ++i)
    if (se.values[i] > cut) kept += rho_s(i, i).real();
  out.support_leak = rho.trace().real() - kept;
  out.support_ok = out.support_leak <= kSupportLeakTol;
  return out;
}

PsiGradient psi_with_gradient(const Matrix& rho, const Matrix& sigma,
                              double index) {
  if (!(index > 0.0) || index == 1.0)
    throw std::invalid_argument("psi: index must lie in (0,1) or (1,inf), got " +
                                std::to_string(index));
  check_shapes(rho, sigma);

  const double c = (1.0 - index) / (2.0 * index);
  const EigPair se = eigh(sigma);
  const double cut = support_cut(se.values);
  const RealVector sc = pseudo_pow(se.values, c, cut);
  const Matrix sigma_c = se.vectors * sc.asDiagonal() * se.vectors.adjoint();

  const Matrix rho_h = symmetrized(rho);
  const Matrix a = symmetrized(sigma_c * rho_h * sigma_c);
  const EigPair ae = eigh(a);

  PsiGradient out;
  for (Eigen::Index i = 0; i < ae.values.size(); ++i)
    if (ae.values[i] > 0.0) out.value += std::pow(ae.values[i], index);

  const Matrix rho_s = se.vectors.adjoint() * rho_h * se.vectors;
  double kept = 0.0;
  for (Eigen::Index i = 0; i < se.values.size(); ++i)
    if (se.values[i] > cut) kept += rho_s(i, i).real();
  out.support_leak = rho_h.trace().real() - kept;

  const double acut = support_cut(ae.values);
  const RealVector agm1 = pseudo_pow(ae.values, index - 1.0, acut);
  const Matrix a_pow = ae.vectors * agm1.asDiagonal() * ae.vectors.adjoint();

  out.d_rho = symmetrized(index * sigma_c * a_pow * sigma_c);

  // Sigma derivative: chain rule through sigma^c needs the divided-difference
  // kernel of x -> x^c over sigma's spectrum.
  const Matrix m1 = rho_h * sigma_c * a_pow;
  const Matrix b = index * (m1 + m1.adjoint());
  const Matrix bt = se.vectors.adjoint() * b * se.vectors;

  const Eigen::Index d = se.values.size();
  Matrix kb(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double si = se.values[i] > cut ? se.values[i] : 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double sj = se.values[j] > cut ? se.values[j] : 0.0;
      double k = 0.0;
      if (si > 0.0 || sj > 0.0) {
        if (std::abs(si - sj) < 1e-9) {
          const double mid = 0.5 * (si + sj);
          k = c * std::pow(mid, c - 1.0);
        } else {
          const double pi = si > 0.0 ? std::pow(si, c) : 0.0;
          const double pj = sj > 0.0 ? std::pow(sj, c) : 0.0;
          k = (pi - pj) / (si - sj);
        }
      }
      kb(i, j) = k * bt(i, j);
    }
  }
  out.d_sigma = symmetrized(se.vectors * kb * se.vectors.adjoint());
  return out;
}

namespace {

// Divided differences of x^p over positive arguments, with the derivative
// limit taken once a pair gets closer than it can be resolved.
double pow_dd1(double a, double b, double p) {
  if (std::abs(a - b) <= 1e-8 * std::max(a, b))
    return p * std::pow(0.5 * (a + b), p - 1.0);
  return (std::pow(a, p) - std::pow(b, p)) / (a - b);
}

double pow_dd2(double a, double b, double c, double p) {
  const double lo = std::min({a, b, c});
  const double hi = std::max({a, b, c});
  const double mid = a + b + c - lo - hi;
  if (hi - lo <= 1e-8 * hi)
    return 0.5 * p * (p - 1.0) * std::pow(mid, p - 2.0);
  return (pow_dd1(hi, mid, p) - pow_dd1(mid, lo, p)) / (hi - lo);
}

}  // namespace

Eigen::MatrixXd psi_hessian(const Matrix& rho, const Matrix& sigma,
                            double index, const std::vector<Matrix>& drho,
                            const std::vector<Matrix>& dsigma) {
  if (!(index > 0.0) || index == 1.0)
    throw std::invalid_argument("psi: index must lie in (0,1) or (1,inf), got " +
                                std::to_string(index));
  check_shapes(rho, sigma);
  if (drho.size() != dsigma.size())
    throw std::invalid_argument("psi: direction lists differ in length");
  const int nt = static_cast<int>(drho.size());

  const double c = (1.0 - index) / (2.0 * index);
  const EigPair se = eigh(sigma);
  const double cut = support_cut(se.values);

  // Compress onto sigma's support; in that basis sigma^c is diagonal and the
  // structural kernel (which never moves) is gone entirely.
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < se.values.size(); ++i)
    if (se.values[i] > cut) ++r;
  Matrix us(sigma.rows(), r);
  RealVector s(r);
  for (Eigen::Index i = 0, k = 0; i < se.values.size(); ++i)
    if (se.values[i] > cut) {
      us.col(k) = se.vectors.col(i);
      s[k++] = se.values[i];
    }
  const RealVector sc = s.array().pow(c).matrix();

  const Matrix rho_r = symmetrized(us.adjoint() * rho * us);
  const Matrix m = symmetrized(sc.asDiagonal() * rho_r * sc.asDiagonal());
  const EigPair me = eigh(m);
  const double mcut = support_cut(me.values);
  const RealVector fp = index * pseudo_pow(me.values, index - 1.0, mcut);
  const Matrix fpm = me.vectors * fp.asDiagonal() * me.vectors.adjoint();

  // Divided-difference kernel of f'(x) = index x^(index-1), with the pseudo
  // convention f'(0) = 0 on m's kernel. That kernel is constant along the
  // motions here (rank of m is pinned by rho's support), which is exactly
  // when the convention reproduces the true second derivative.
  Eigen::MatrixXd kfp(me.values.size(), me.values.size());
  for (Eigen::Index i = 0; i < me.values.size(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double mi = me.values[i] > mcut ? me.values[i] : 0.0;
      const double mj = me.values[j] > mcut ? me.values[j] : 0.0;
      double k = 0.0;
      if (mi > 0.0 && mj > 0.0)
        k = index * pow_dd1(mi, mj, index - 1.0);
      else if (mi > 0.0 || mj > 0.0)
        k = index * std::pow(std::max(mi, mj), index - 2.0);
      kfp(i, j) = kfp(j, i) = k;
    }

  // Kernel of the first divided differences of x^c over sigma's support.
  Eigen::MatrixXd kc(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      kc(i, j) = kc(j, i) = pow_dd1(s[i], s[j], c);

  const Matrix rd = rho_r * sc.asDiagonal();
  const Matrix kcc = kc.cast<Complex>();

  std::vector<Matrix> rp(nt), sp(nt), ep(nt), dmt(nt), xp(nt), zp(nt);
  for (int p = 0; p < nt; ++p) {
    rp[p] = symmetrized(us.adjoint() * drho[p] * us);
    sp[p] = symmetrized(us.adjoint() * dsigma[p] * us);
    ep[p] = kcc.cwiseProduct(sp[p]);
    const Matrix mid = sc.asDiagonal() * rp[p] * sc.asDiagonal();
    const Matrix dm = ep[p] * rd + mid + rd.adjoint() * ep[p];
    dmt[p] = me.vectors.adjoint() * dm * me.vectors;
    xp[p] = sc.asDiagonal() * fpm * ep[p] + ep[p] * fpm * sc.asDiagonal();
    zp[p] = rho_r * ep[p] * fpm;
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nt, nt);

  // Trace-function curvature on the moving product, plus the mixed and
  // quadratic pieces from sigma^c moving on both sides of rho.
  const Eigen::MatrixXcd kfpc = kfp.cast<Complex>();
  for (int p = 0; p < nt; ++p) {
    const Matrix kdm = kfpc.cwiseProduct(dmt[p]);
    for (int q = 0; q <= p; ++q) {
      Complex acc = kdm.cwiseProduct(dmt[q].conjugate()).sum();
      acc += rp[q].transpose().cwiseProduct(xp[p]).sum() +
             rp[p].transpose().cwiseProduct(xp[q]).sum();
      acc += ep[p].transpose().cwiseProduct(zp[q]).sum() +
             ep[q].transpose().cwiseProduct(zp[p]).sum();
      h(p, q) = h(q, p) = acc.real();
    }
  }

  // Second derivative of sigma^c hitting rho from either side.
  const Matrix w = rd * fpm + fpm * rd.adjoint();
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(nt, nt);
  Matrix ak(r, nt), bk(r, nt), fk(r, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        fk(i, j) = pow_dd2(s[i], s[k], s[j], c) * w(j, i);
    for (int p = 0; p < nt; ++p) {
      ak.col(p) = sp[p].col(k);
      bk.col(p) = sp[p].row(k).transpose();
    }
    t2 += (ak.transpose() * fk * bk).real();
  }
  h += t2 + t2.transpose();
  return h;
}

}  // namespace detail

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.5) || !(gamma < 1.0))
    throw std::invalid_argument("psi: gamma must lie in (1/2, 1), got " +
                                std::to_string(gamma));
}

}  // namespace

PsiValue psi_gamma(const DensityMatrix& rho, const DensityMatrix& sigma,
                   double gamma) {
  check_gamma(gamma);
  return detail::psi_general(rho.mat(), sigma.mat(), gamma);
}

std::pair<HermitianOperator, HermitianOperator> psi_gamma_gradient(
    const DensityMatrix& rho, const DensityMatrix& sigma, double gamma) {
  check_gamma(gamma);
  detail::PsiGradient g =
      detail::psi_with_gradient(rho.mat(), sigma.mat(), gamma);
  return {make_hermitian(rho.op.sig, g.d_rho),
          make_hermitian(sigma.op.sig, g.d_sigma)};
}

}  // namespace dpsk
