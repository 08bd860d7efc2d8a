#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dpskrate/feasible.hpp"
#include "dpskrate/measurement.hpp"
#include "oracles/oracle_util.hpp"

using namespace dpsk;

namespace {

double frob(const Matrix& m) { return m.norm(); }

// Real Frobenius pairing of two Hermitian matrices.
double pair(const Matrix& a, const Matrix& b) {
  return (a * b).trace().real();
}

Matrix brute_residual(const AliceMarginal& marginal, const Matrix& omega) {
  const Matrix traced_s = oracle::brute_partial_trace(omega, {2, 2, 2}, 1);
  const Matrix omega_r = oracle::brute_partial_trace(traced_s, {2, 2}, 0);
  return traced_s - kron(marginal.sigma_a.mat, omega_r);
}

}  // namespace

TEST_CASE("hvec is a linear isometry onto real coordinates") {
  auto rng = oracle::make_rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_hermitian(rng, 8);
    const Matrix b = oracle::random_hermitian(rng, 8);

    const RealVector va = hvec(a);
    CHECK(va.size() == 64);
    CHECK(frob(hunvec(va) - a) <= 1e-12);
    CHECK(va.dot(hvec(b)) == doctest::Approx(pair(a, b)).epsilon(1e-10));
    CHECK(frob(hunvec(hvec(a) * 2.5 + hvec(b)) - (2.5 * a + b)) <= 1e-12);
  }
}

TEST_CASE("the anchor state is strictly feasible") {
  const AliceMarginal marginal = build_alice_marginal(0.45, 1.0);
  const FeasibleSet set = make_feasible_set(marginal);

  CHECK(set.sig.labels == std::vector<std::string>{"A", "S", "R"});
  CHECK(set.sig.dims == std::vector<int>{2, 2, 2});
  CHECK(frob(set.omega0 -
             kron(marginal.sigma_a.mat, Matrix::Identity(4, 4) / 4.0)) <=
        1e-14);

  const Membership m = check_membership(set, set.omega0);
  CHECK(m.member);
  CHECK(m.marginal_norm <= 1e-12);
  CHECK(m.trace_gap <= 1e-12);
  CHECK(m.min_eigenvalue > 1e-3);
}

TEST_CASE("the marginal residual matches a brute-force contraction") {
  auto rng = oracle::make_rng(13);
  const AliceMarginal marginal = build_alice_marginal(0.45, 1.2);
  const FeasibleSet set = make_feasible_set(marginal);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix w = oracle::random_hermitian(rng, 8);
    const Matrix got = marginal_residual(set, w);
    CHECK(frob(got - brute_residual(marginal, w)) <= 1e-12);
    // The residual map kills the trace identically.
    CHECK(std::abs(got.trace().real()) <= 1e-12);
  }
}

TEST_CASE("residual and its adjoint form an exact pairing") {
  auto rng = oracle::make_rng(19);
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix w = oracle::random_hermitian(rng, 8);
    const Matrix y = oracle::random_hermitian(rng, 4);
    const double lhs = pair(y, marginal_residual(set, w));
    const double rhs = pair(marginal_residual_adjoint(set, y), w);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("constraint matrix realizes the residual in coordinates") {
  auto rng = oracle::make_rng(23);
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));
  CHECK(set.constraint_matrix.rows() == 16);
  CHECK(set.constraint_matrix.cols() == 64);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix w = oracle::random_hermitian(rng, 8);
    const RealVector image = set.constraint_matrix * hvec(w);
    CHECK((image - hvec(marginal_residual(set, w))).norm() <= 1e-11);
  }
}

TEST_CASE("the tangent basis is orthonormal and constraint-free") {
  // The marginal map has a 4-dimensional cokernel (anything of the form
  // identity (x) z is invisible to it), so of the 16 residual coordinates
  // only 12 are independent; with the trace row that leaves 64 - 13.
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));
  REQUIRE(set.tangent.size() == 51);
  for (size_t i = 0; i < set.tangent.size(); ++i) {
    const Matrix& bi = set.tangent[i];
    CHECK(frob(bi - bi.adjoint()) <= 1e-12);
    CHECK(std::abs(bi.trace().real()) <= 1e-11);
    CHECK(frob(marginal_residual(set, bi)) <= 1e-11);
    for (size_t j = i; j < set.tangent.size(); ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      CHECK(std::abs(pair(bi, set.tangent[j]) - want) <= 1e-10);
    }
  }
}

TEST_CASE("tangent moves preserve feasibility of the linear constraints") {
  auto rng = oracle::make_rng(31);
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));
  std::normal_distribution<double> g(0.0, 0.01);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix w = set.omega0;
    for (const Matrix& b : set.tangent) w += g(rng) * b;
    CHECK(std::abs(w.trace().real() - 1.0) <= 1e-11);
    CHECK(frob(marginal_residual(set, w)) <= 1e-10);
  }
}

TEST_CASE("membership separates each failure mode") {
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));

  Matrix scaled = 1.01 * set.omega0;
  Membership m = check_membership(set, scaled);
  CHECK(!m.member);
  CHECK(m.trace_gap > 1e-3);

  Matrix indefinite = set.omega0;
  indefinite(0, 0) += 0.3;
  indefinite(7, 7) -= 0.3;
  m = check_membership(set, indefinite);
  CHECK(!m.member);
  CHECK(m.min_eigenvalue < -1e-3);

  // Unit trace and PSD but the wrong Alice marginal.
  Matrix wrong = kron(Matrix::Identity(2, 2) / 2.0, Matrix::Identity(4, 4) / 4.0);
  m = check_membership(set, wrong);
  CHECK(!m.member);
  CHECK(m.marginal_norm > 1e-3);
}

TEST_CASE("projection lands on the set and fixes its members") {
  auto rng = oracle::make_rng(37);
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));

  for (int trial = 0; trial < 40; ++trial) {
    const Matrix seed = oracle::random_hermitian(rng, 8, trial % 2 ? 1.0 : 0.2);
    const Matrix start = set.omega0 + seed;
    const DensityMatrix proj =
        project_feasible(make_hermitian(set.sig, start), set);
    const Membership m = check_membership(set, proj.mat());
    CHECK(m.member);

    const DensityMatrix again = project_feasible(proj.op, set);
    CHECK(frob(again.mat() - proj.mat()) <= 1e-8);
  }
}

TEST_CASE("projection picks the nearest point among feasible samples") {
  auto rng = oracle::make_rng(43);
  const FeasibleSet set = make_feasible_set(build_alice_marginal(0.45, 1.0));

  const Matrix candidate = set.omega0 + oracle::random_hermitian(rng, 8, 0.5);
  const DensityMatrix proj =
      project_feasible(make_hermitian(set.sig, candidate), set);
  const double best = frob(candidate - proj.mat());

  for (int trial = 0; trial < 25; ++trial) {
    const Matrix other_seed = set.omega0 + oracle::random_hermitian(rng, 8, 0.3);
    const DensityMatrix other =
        project_feasible(make_hermitian(set.sig, other_seed), set);
    CHECK(frob(candidate - other.mat()) >= best - 1e-7);
  }
}
