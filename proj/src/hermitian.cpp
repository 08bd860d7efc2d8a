#include "dpskrate/hermitian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpsk {

HermitianOperator make_hermitian(RegisterSignature sig, const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("make_hermitian: matrix is not square");
  if (m.rows() != sig.dim())
    throw std::invalid_argument(
        "make_hermitian: side length " + std::to_string(m.rows()) +
        " does not match signature " + sig.to_string());
  double drift = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (drift > kHermTol)
    throw std::invalid_argument(
        "make_hermitian: Hermiticity drift " + std::to_string(drift) +
        " exceeds tolerance on " + sig.to_string());
  return HermitianOperator{std::move(sig), symmetrized(m)};
}

DensityMatrix make_density(HermitianOperator op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.mat, Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol)
    throw std::invalid_argument("make_density: minimum eigenvalue " +
                                std::to_string(min_eig) + " below -1e-10");
  double tr = op.mat.trace().real();
  if (tr < -kPsdTol || tr > 1.0 + kPsdTol)
    throw std::invalid_argument("make_density: trace " + std::to_string(tr) +
                                " outside [0, 1]");
  return DensityMatrix{std::move(op)};
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator{a.sig.joined(b.sig), kron(a.mat, b.mat)};
}

HermitianOperator partial_trace(const HermitianOperator& op,
                                std::string_view traced_label) {
  int pos = op.sig.position(traced_label);
  if (pos < 0)
    throw std::invalid_argument("partial_trace: unknown register label '" +
                                std::string(traced_label) + "' in signature " +
                                op.sig.to_string());
  int left = 1, right = 1;
  int mid = op.sig.dims[pos];
  for (int i = 0; i < pos; ++i) left *= op.sig.dims[i];
  for (std::size_t i = pos + 1; i < op.sig.dims.size(); ++i)
    right *= op.sig.dims[i];

  Matrix out = Matrix::Zero(left * right, left * right);
  for (int li = 0; li < left; ++li)
    for (int ri = 0; ri < right; ++ri)
      for (int lj = 0; lj < left; ++lj)
        for (int rj = 0; rj < right; ++rj) {
          Complex acc = 0.0;
          for (int m = 0; m < mid; ++m)
            acc += op.mat((li * mid + m) * right + ri, (lj * mid + m) * right + rj);
          out(li * right + ri, lj * right + rj) = acc;
        }
  return HermitianOperator{op.sig.dropped(pos), symmetrized(out)};
}

Matrix frac_power(const Matrix& psd, double exponent) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(psd));
  const auto& vals = es.eigenvalues();
  double vmax = vals.cwiseAbs().maxCoeff();
  double zero_cut = 1e-12 * std::max(vmax, 1e-300);
  if (vals.minCoeff() < -1e-10 * std::max(vmax, 1.0))
    throw std::invalid_argument("frac_power: input not PSD (min eigenvalue " +
                                std::to_string(vals.minCoeff()) + ")");
  RealVector powered(vals.size());
  for (int i = 0; i < vals.size(); ++i) {
    double v = vals[i];
    powered[i] = (v <= zero_cut) ? 0.0 : std::pow(v, exponent);
  }
  Matrix out = es.eigenvectors() * powered.asDiagonal() *
               es.eigenvectors().adjoint();
  return symmetrized(out);
}

HermitianOperator frac_power(const HermitianOperator& op, double exponent) {
  return HermitianOperator{op.sig, frac_power(op.mat, exponent)};
}

Matrix basis_projector(int d, int i) {
  Matrix p = Matrix::Zero(d, d);
  p(i, i) = 1.0;
  return p;
}

}  // namespace dpsk
