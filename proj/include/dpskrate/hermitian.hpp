#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string_view>

#include "dpskrate/registers.hpp"

namespace dpsk {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Entrywise Hermiticity drift allowed before construction rejects the input.
inline constexpr double kHermTol = 1e-12;
// Eigenvalue floor for density matrices (small negative noise is accepted).
inline constexpr double kPsdTol = 1e-10;

// Dense Hermitian matrix tagged with the registers it acts on. The universal
// carrier for states, POVM elements and superoperator outputs.
struct HermitianOperator {
  RegisterSignature sig;
  Matrix mat;

  int dim() const { return static_cast<int>(mat.rows()); }
};

// Validates side length and Hermiticity (drift < kHermTol), then stores the
// symmetrized matrix so downstream arithmetic starts from an exact fixed point.
HermitianOperator make_hermitian(RegisterSignature sig, const Matrix& m);

// Subnormalized state: PSD within kPsdTol, trace in [0, 1 + kPsdTol].
struct DensityMatrix {
  HermitianOperator op;

  const Matrix& mat() const { return op.mat; }
  int dim() const { return op.dim(); }
};

DensityMatrix make_density(HermitianOperator op);

// Kronecker product; signatures concatenate.
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
Matrix kron(const Matrix& a, const Matrix& b);

// Trace out one named register. Trace-preserving and linear.
HermitianOperator partial_trace(const HermitianOperator& op,
                                std::string_view traced_label);

// Eigenbasis power of a PSD operator. Negative exponents act on the support
// (pseudo-power); eigenvalues below 1e-12 * lambda_max count as exact zeros.
HermitianOperator frac_power(const HermitianOperator& op, double exponent);
Matrix frac_power(const Matrix& psd, double exponent);

// (m + m^dagger) / 2, cheap insurance after arithmetic pipelines.
inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline HermitianOperator identity_operator(RegisterSignature sig) {
  int d = sig.dim();
  return HermitianOperator{std::move(sig), Matrix::Identity(d, d)};
}

// |i><i| on a single register of dimension d.
Matrix basis_projector(int d, int i);

}  // namespace dpsk
