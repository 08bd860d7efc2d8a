#pragma once

#include <utility>
#include <vector>

#include "dpskrate/hermitian.hpp"

namespace dpsk {

// Result of the sandwiched trace functional
//   Psi_g(rho, sigma) = Tr[(sigma^c rho sigma^c)^g],  c = (1-g)/(2g).
// Mass of rho outside sigma's support is projected out of the value and
// reported; callers decide whether the leak is acceptable.
struct PsiValue {
  double value = 0.0;
  double support_leak = 0.0;
  bool support_ok = true;
};

// Tolerated support leak before PsiValue::support_ok flips.
inline constexpr double kSupportLeakTol = 1e-9;

// Index restricted to (1/2, 1), the jointly concave regime used everywhere in
// the key-rate programs.
PsiValue psi_gamma(const DensityMatrix& rho, const DensityMatrix& sigma,
                   double gamma);

// Frechet derivatives (d/d rho, d/d sigma) of Psi_gamma via the
// Daleckii-Krein formula; eigenvalue pairs closer than 1e-9 fall back to the
// derivative limit of the divided difference.
std::pair<HermitianOperator, HermitianOperator> psi_gamma_gradient(
    const DensityMatrix& rho, const DensityMatrix& sigma, double gamma);

namespace detail {

// Same functional for any index in (0,1) or (1,inf); used by the divergence
// wrappers, which need indices outside the concave window.
PsiValue psi_general(const Matrix& rho, const Matrix& sigma, double index);

struct PsiGradient {
  double value = 0.0;
  Matrix d_rho;
  Matrix d_sigma;
  double support_leak = 0.0;
};

// Value and both gradients from one pair of eigendecompositions.
PsiGradient psi_with_gradient(const Matrix& rho, const Matrix& sigma,
                              double index);

// Exact second derivative of the same functional along simultaneous
// (rho, sigma) motions. Direction p moves rho by drho[p] and sigma by
// dsigma[p]; the returned matrix holds the bilinear form over all pairs.
// Everything is compressed onto sigma's support first, so rho and the
// directions must live inside it (their outside parts are dropped, matching
// how psi_general ignores them).
Eigen::MatrixXd psi_hessian(const Matrix& rho, const Matrix& sigma,
                            double index, const std::vector<Matrix>& drho,
                            const std::vector<Matrix>& dsigma);

}  // namespace detail
}  // namespace dpsk
