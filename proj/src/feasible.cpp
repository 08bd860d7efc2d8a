#include "dpskrate/feasible.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dpsk {
namespace {

constexpr int kDim = 8;       // A (x) S (x) R
constexpr int kResDim = 4;    // A (x) R
const double kSqrt2 = std::sqrt(2.0);

int asr(int a, int s, int r) { return 4 * a + 2 * s + r; }
int ar(int a, int r) { return 2 * a + r; }

Matrix trace_out_s(const Matrix& omega) {
  Matrix out = Matrix::Zero(kResDim, kResDim);
  for (int a = 0; a < 2; ++a)
    for (int r = 0; r < 2; ++r)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int r2 = 0; r2 < 2; ++r2)
          for (int s = 0; s < 2; ++s)
            out(ar(a, r), ar(a2, r2)) += omega(asr(a, s, r), asr(a2, s, r2));
  return out;
}

Matrix trace_out_as(const Matrix& omega) {
  Matrix out = Matrix::Zero(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int r2 = 0; r2 < 2; ++r2)
      for (int a = 0; a < 2; ++a)
        for (int s = 0; s < 2; ++s)
          out(r, r2) += omega(asr(a, s, r), asr(a, s, r2));
  return out;
}

// Orthonormal Hermitian basis element index k of a d x d space, k < d^2,
// matching the hvec coordinate order.
int hvec_size(int d) { return d * d; }

}  // namespace

RealVector hvec(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  RealVector v(hvec_size(d));
  int k = 0;
  for (int i = 0; i < d; ++i) v[k++] = m(i, i).real();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      v[k++] = kSqrt2 * m(i, j).real();
      v[k++] = kSqrt2 * m(i, j).imag();
    }
  return v;
}

Matrix hunvec(const RealVector& v) {
  const int d = static_cast<int>(std::lround(std::sqrt(double(v.size()))));
  if (d * d != v.size())
    throw std::invalid_argument("hunvec needs a square-size vector");
  Matrix m = Matrix::Zero(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i) m(i, i) = v[k++];
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double re = v[k++] / kSqrt2;
      const double im = v[k++] / kSqrt2;
      m(i, j) = Complex(re, im);
      m(j, i) = Complex(re, -im);
    }
  return m;
}

Matrix marginal_residual(const FeasibleSet& set, const Matrix& omega) {
  const Matrix rho_r = trace_out_as(omega);
  return trace_out_s(omega) - kron(set.marginal.sigma_a.mat, rho_r);
}

Matrix marginal_residual_adjoint(const FeasibleSet& set, const Matrix& y) {
  // <y, Tr_S w> lifts y across the S leg; the sigma_A (x) Tr_AS w part pulls
  // back to the identity on A,S against a contracted 2x2 block on R.
  Matrix out = Matrix::Zero(kDim, kDim);
  for (int a = 0; a < 2; ++a)
    for (int r = 0; r < 2; ++r)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int r2 = 0; r2 < 2; ++r2)
          for (int s = 0; s < 2; ++s)
            out(asr(a, s, r), asr(a2, s, r2)) += y(ar(a, r), ar(a2, r2));

  const Matrix& sa = set.marginal.sigma_a.mat;
  Matrix z = Matrix::Zero(2, 2);  // Tr_A[(sigma_A (x) I) y]
  for (int r = 0; r < 2; ++r)
    for (int r2 = 0; r2 < 2; ++r2)
      for (int a = 0; a < 2; ++a)
        for (int a2 = 0; a2 < 2; ++a2)
          z(r, r2) += sa(a, a2) * y(ar(a2, r), ar(a, r2));

  for (int a = 0; a < 2; ++a)
    for (int s = 0; s < 2; ++s)
      for (int r = 0; r < 2; ++r)
        for (int r2 = 0; r2 < 2; ++r2)
          out(asr(a, s, r), asr(a, s, r2)) -= z(r, r2);
  return symmetrized(out);
}

FeasibleSet make_feasible_set(const AliceMarginal& marginal) {
  FeasibleSet set;
  set.marginal = marginal;
  set.sig = make_signature({"A", "S", "R"}, {2, 2, 2});
  set.omega0 = kron(marginal.sigma_a.mat,
                    Matrix::Identity(kResDim, kResDim) / kResDim);

  // Column j of the constraint matrix is hvec of T applied to the j-th
  // Hermitian basis element of the 8x8 space.
  set.constraint_matrix.resize(hvec_size(kResDim), hvec_size(kDim));
  for (int j = 0; j < hvec_size(kDim); ++j) {
    RealVector e = RealVector::Zero(hvec_size(kDim));
    e[j] = 1.0;
    set.constraint_matrix.col(j) = hvec(marginal_residual(set, hunvec(e)));
  }

  // Stack the trace functional on top and take the SVD null space: those
  // directions keep both the marginal and the normalization fixed.
  Eigen::MatrixXd rows(hvec_size(kResDim) + 1, hvec_size(kDim));
  rows.topRows(hvec_size(kResDim)) = set.constraint_matrix;
  rows.bottomRows(1) = hvec(Matrix::Identity(kDim, kDim)).transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const double cut = 1e-10 * svd.singularValues()[0];
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > cut) ++rank;

  set.row_space = svd.matrixV().leftCols(rank).transpose();
  for (int i = rank; i < svd.matrixV().cols(); ++i)
    set.tangent.push_back(hunvec(svd.matrixV().col(i)));
  return set;
}

Membership check_membership(const FeasibleSet& set, const Matrix& omega,
                            double tol) {
  Membership out;
  out.marginal_norm = marginal_residual(set, omega).norm();
  out.trace_gap = std::abs(omega.trace().real() - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(omega));
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.member = out.marginal_norm <= tol && out.trace_gap <= tol &&
               out.min_eigenvalue >= -tol;
  return out;
}

DensityMatrix project_feasible(const HermitianOperator& candidate,
                               const FeasibleSet& set) {
  if (candidate.dim() != kDim)
    throw std::invalid_argument("projection expects an 8x8 operator, got " +
                                std::to_string(candidate.dim()));

  // KKT form of min ||X - C||^2 over {A hvec(X) = rhs, X psd}: the solution
  // is X = clamp(C + unvec(A^T y)) for multipliers y making the constraint
  // residual r(y) vanish. r is the gradient of a smooth convex function, so
  // Newton with the clamp's spectral Jacobian and a backtracking line search
  // closes in quadratically.
  const Eigen::MatrixXd& a = set.row_space;
  const int ncon = static_cast<int>(a.rows());
  const RealVector vc = hvec(symmetrized(candidate.mat));
  const RealVector rhs = a * hvec(set.omega0);

  struct Clamped {
    Matrix x;
    Eigen::SelfAdjointEigenSolver<Matrix> es;
  };
  const auto clamp = [](const RealVector& z) {
    Clamped out;
    out.es.compute(hunvec(z));
    const RealVector lam = out.es.eigenvalues().cwiseMax(0.0);
    out.x = out.es.eigenvectors() * lam.asDiagonal() *
            out.es.eigenvectors().adjoint();
    return out;
  };
  const auto objective = [&](const RealVector& y) {
    const Clamped c = clamp(vc + a.transpose() * y);
    return 0.5 * c.x.squaredNorm() - rhs.dot(y);
  };

  RealVector y = RealVector::Zero(ncon);
  Clamped cur = clamp(vc);
  constexpr int kMaxNewton = 40;
  const double tol = 1e-13 * std::max(1.0, vc.norm());
  for (int it = 0; it < kMaxNewton; ++it) {
    const RealVector r = a * hvec(cur.x) - rhs;
    if (r.norm() <= tol) break;

    // Generalized Jacobian of the eigenvalue clamp in the current basis:
    // divided differences of max(x, 0) across the spectrum.
    const RealVector& lam = cur.es.eigenvalues();
    Eigen::MatrixXd kmat(kDim, kDim);
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        if (std::abs(lam[i] - lam[j]) > 1e-14) {
          kmat(i, j) = (std::max(lam[i], 0.0) - std::max(lam[j], 0.0)) /
                       (lam[i] - lam[j]);
        } else {
          kmat(i, j) = (lam[i] + lam[j] > 0.0) ? 1.0 : 0.0;
        }
      }
    Eigen::MatrixXd h(ncon, ncon);
    const Matrix& u = cur.es.eigenvectors();
    for (int col = 0; col < ncon; ++col) {
      const Matrix e = hunvec(a.row(col).transpose());
      const Matrix inner = (u.adjoint() * e * u).cwiseProduct(kmat);
      h.col(col) = a * hvec(symmetrized(u * inner * u.adjoint()));
    }
    h.diagonal().array() += 1e-11 * (1.0 + h.trace());

    const RealVector step = h.ldlt().solve(-r);
    const double slope = r.dot(step);
    const double base = objective(y);
    double t = 1.0;
    RealVector next = y + step;
    while (t > 1e-12 && objective(next) > base + 0.25 * t * slope) {
      t *= 0.5;
      next = y + t * step;
    }
    if (t <= 1e-12) break;
    y = next;
    cur = clamp(vc + a.transpose() * y);
  }

  // Degenerate boundary contact can leave Newton a hair short of the root.
  // Snap the constraints shut along the row space, then lean on the strictly
  // feasible anchor just enough to absorb the eigenvalue the snap may have
  // pushed negative. The result is feasible to machine precision and within
  // a few parts in 1e7 of the true projection even in the worst stall.
  RealVector r = a * hvec(cur.x) - rhs;
  if (r.norm() > 1e-6)
    throw std::runtime_error(
        "feasibility projection did not converge; constraint residual " +
        std::to_string(r.norm()));
  Matrix x = cur.x - hunvec(a.transpose() * r);
  if (r.norm() > 1e-13) {
    Eigen::SelfAdjointEigenSolver<Matrix> anchor(set.omega0);
    const double floor = anchor.eigenvalues().minCoeff();
    const double theta = std::min(1.0, 2.0 * r.norm() / floor);
    x = (1.0 - theta) * x + theta * set.omega0;
  }
  return make_density(make_hermitian(set.sig, x));
}

}  // namespace dpsk
