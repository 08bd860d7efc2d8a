#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dpskrate/hermitian.hpp"
#include "dpskrate/measurement.hpp"

namespace dpsk {

// Isometry between Hermitian d x d matrices and R^{d^2}: diagonal entries,
// then sqrt(2) * (Re, Im) of each upper off-diagonal. Frobenius inner
// products map to dot products exactly.
RealVector hvec(const Matrix& m);
Matrix hunvec(const RealVector& v);

// States on A (x) S (x) R with unit trace, PSD, and Alice's marginal pinned:
// tracing out S must leave sigma_A uncorrelated with R.
struct FeasibleSet {
  AliceMarginal marginal;
  RegisterSignature sig;  // A, S, R with dims 2, 2, 2
  Matrix omega0;          // sigma_A (x) I/4, strictly feasible

  // Linear-constraint data in hvec coordinates: the marginal map as a
  // 16 x 64 real matrix, an orthonormal basis for the row space of the
  // stacked {marginal, trace} constraints (13 x 64), and an orthonormal
  // basis of the complementary tangent space of {trace = 1, marginal
  // pinned} (51 directions).
  Eigen::MatrixXd constraint_matrix;
  Eigen::MatrixXd row_space;
  std::vector<Matrix> tangent;
};

FeasibleSet make_feasible_set(const AliceMarginal& marginal);

// T(omega) = Tr_S(omega) - sigma_A (x) Tr_AS(omega), a Hermitian 4x4 on
// A (x) R. Feasible states satisfy T(omega) = 0.
Matrix marginal_residual(const FeasibleSet& set, const Matrix& omega);

// Adjoint of T: an 8x8 Hermitian with <y, T(w)> = <adjoint(y), w> for all w.
Matrix marginal_residual_adjoint(const FeasibleSet& set, const Matrix& y);

struct Membership {
  bool member = false;
  double marginal_norm = 0.0;  // Frobenius norm of T(omega)
  double trace_gap = 0.0;      // |tr(omega) - 1|
  double min_eigenvalue = 0.0;
};

Membership check_membership(const FeasibleSet& set, const Matrix& omega,
                            double tol = 1e-9);

// Nearest feasible state in Frobenius norm. Solved exactly through the dual:
// the projection is the positive part of candidate + adjoint multipliers,
// and the multipliers satisfy a small semismooth root-finding problem.
DensityMatrix project_feasible(const HermitianOperator& candidate,
                               const FeasibleSet& set);

}  // namespace dpsk
