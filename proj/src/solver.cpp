#include "dpskrate/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpskrate/psi.hpp"

namespace dpsk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

// Relative duality gap below which a solve reports converged.
constexpr double kGapTol = 1e-6;
// Floor applied to zero entries of the tradeoff reference distribution.
constexpr double kReferenceFloor = 1e-12;

void check_alpha_window(double alpha) {
  if (!(alpha > 1.0) || !(alpha < 2.0))
    throw std::invalid_argument("alpha must lie in (1,2), got " +
                                std::to_string(alpha));
}

// Concave objective over the feasible set. value() may return -inf outside
// the objective's own domain; value_grad() and hessian() are only called
// where the line search already found a finite value. hessian() returns the
// exact second derivative in tangent-basis coordinates; Newton quality near
// the boundary depends on it being exact, not differenced.
struct Objective {
  std::function<double(const Matrix&)> value;
  std::function<double(const Matrix&, Matrix&)> value_grad;
  std::function<Eigen::MatrixXd(const Matrix&)> hessian;
};

struct MaximizerResult {
  Matrix omega;           // strictly feasible final iterate
  double primal = -kInf;  // objective there
  double dual = kInf;     // certified upper bound on the true maximum
  int iterations = 0;
};

// Upper bound on max tr[L w] over the feasible set, for one choice of
// marginal multipliers y: the constraint directions contribute nothing on
// the set, so the top eigenvalue of L - T*(y) bounds the linear form over
// every unit-trace PSD w. Valid for any y; y only tunes tightness.
double eigenvalue_bound(const Matrix& grad, const FeasibleSet& set,
                        const RealVector& y) {
  const Matrix shifted = grad - hunvec(set.constraint_matrix.transpose() * y);
  Eigen::SelfAdjointEigenSolver<Matrix> es(shifted, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue bound: eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

// Tightens the multipliers by solving min c subject to
// c I - (L - T*(y)) PSD over (c, y), which is exactly the best bound the
// eigenvalue trick can produce. Seventeen variables and an 8x8 cone make
// plain barrier Newton with exact derivatives both fast and reliable; the
// caller re-evaluates the exact eigenvalue at the returned y, so loose path
// ends cost tightness, never validity.
RealVector tighten_multipliers(const Matrix& grad, const FeasibleSet& set,
                               RealVector y) {
  const Eigen::MatrixXd& c = set.constraint_matrix;
  const int ny = static_cast<int>(y.size());
  const int dim = static_cast<int>(grad.rows());

  double top = eigenvalue_bound(grad, set, y);
  const double margin = 1e-3 * std::max(1.0, std::abs(top));
  double cvar = top + margin;

  const auto slack = [&](double cv, const RealVector& yv) -> Matrix {
    return cv * Matrix::Identity(dim, dim) - grad +
           hunvec(c.transpose() * yv);
  };

  for (double nu = margin; nu > 1e-11 * std::max(1.0, std::abs(cvar));
       nu *= 0.1) {
    for (int it = 0; it < 8; ++it) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(slack(cvar, y));
      if (es.info() != Eigen::Success ||
          es.eigenvalues().minCoeff() <= 0.0)
        return y;  // numerical corner; keep the best multipliers so far
      const Matrix sinv = es.eigenvectors() *
                          es.eigenvalues().cwiseInverse().asDiagonal() *
                          es.eigenvectors().adjoint();

      // phi = cvar - nu log det S; variables ordered (cvar, y).
      RealVector g(ny + 1);
      g(0) = 1.0 - nu * sinv.trace().real();
      g.tail(ny) = -nu * (c * hvec(sinv));

      Eigen::MatrixXcd stack(dim * dim, ny + 1);
      stack.col(0) =
          Eigen::Map<const Eigen::VectorXcd>(sinv.data(), dim * dim);
      for (int k = 0; k < ny; ++k) {
        const Matrix pk = sinv * hunvec(c.row(k).transpose());
        stack.col(k + 1) =
            Eigen::Map<const Eigen::VectorXcd>(pk.data(), dim * dim);
      }
      Eigen::MatrixXcd stack_t(dim * dim, ny + 1);
      for (int k = 0; k <= ny; ++k) {
        const Matrix mk =
            Eigen::Map<const Matrix>(stack.col(k).data(), dim, dim)
                .transpose();
        stack_t.col(k) =
            Eigen::Map<const Eigen::VectorXcd>(mk.data(), dim, dim * dim);
      }
      Eigen::MatrixXd h = nu * (stack.transpose() * stack_t).real();
      h.diagonal().array() += 1e-13 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());

      const RealVector d = h.ldlt().solve(-g);
      const double decrement = -g.dot(d);
      double t = 1.0;
      while (t > 1e-12) {
        Eigen::LLT<Matrix> llt(slack(cvar + t * d(0), y + t * d.tail(ny)));
        if (llt.info() == Eigen::Success) break;
        t *= 0.5;
      }
      cvar += t * d(0);
      y += t * d.tail(ny);
      if (decrement < 0.1 * nu) break;
    }
  }
  return y;
}

// Certified upper bound on the maximum via the gradient inequality at the
// final iterate: concavity gives F(w) <= F(wbar) + <grad, w - wbar>, and
// the linear part is bounded over the set by the eigenvalue trick above.
// At the end of the barrier path grad + mu winv lies in the span of the
// constraint adjoints plus the identity, so fitting the multipliers against
// that combination recovers them to the centrality error; the barrier term
// never enters the certificate itself, only the guess. A smoothing polish
// mops up whatever the fit leaves behind.
double certify_upper_bound(const Matrix& grad, const Matrix& omega,
                           double primal, const FeasibleSet& set,
                           double gap_target, double mu, const Matrix& winv) {
  const Eigen::MatrixXd& c = set.constraint_matrix;
  const int dim = static_cast<int>(omega.rows());
  Eigen::MatrixXd design(c.cols(), c.rows() + 1);
  design.leftCols(c.rows()) = c.transpose();
  design.col(c.rows()) = hvec(Matrix::Identity(dim, dim));
  const RealVector fit =
      design.colPivHouseholderQr().solve(hvec(grad + mu * winv));

  RealVector y = fit.head(c.rows());
  const double inner = (grad * omega).trace().real();
  double best = primal - inner + eigenvalue_bound(grad, set, y);

  if (best - primal > 0.2 * gap_target) {
    y = tighten_multipliers(grad, set, y);
    best = std::min(best, primal - inner + eigenvalue_bound(grad, set, y));
  }
  return best;
}

// Interior-point maximization of a smooth concave objective over the
// feasible set, in the coordinates of the tangent basis so the affine
// constraints hold identically. Each stage Newton-solves the composite
// F + mu log det with analytic derivatives throughout; the barrier block of
// the Hessian carries the stiff directions. gap_target (absolute, objective
// units) sets how far the barrier path is followed.
MaximizerResult maximize_concave(const Objective& obj, const FeasibleSet& set,
                                 const Matrix* warm, double gap_target) {
  const int nt = static_cast<int>(set.tangent.size());
  const int dim = static_cast<int>(set.omega0.rows());
  Eigen::MatrixXd basis(dim * dim, nt);
  for (int j = 0; j < nt; ++j) basis.col(j) = hvec(set.tangent[j]);
  const RealVector v0 = hvec(set.omega0);

  const auto state_at = [&](const RealVector& x) -> Matrix {
    return hunvec(v0 + basis * x);
  };
  const auto min_eig = [](const Matrix& w) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };

  RealVector x = RealVector::Zero(nt);
  if (warm != nullptr) {
    x = basis.transpose() * (hvec(symmetrized(*warm)) - v0);
    // The warm state may touch the boundary; pull it inward until the
    // barrier is usable.
    for (int k = 0; k < 80; ++k) {
      if (min_eig(state_at(x)) > 1e-11 &&
          std::isfinite(obj.value(state_at(x))))
        break;
      x *= 0.7;
    }
  }

  const double f_start = obj.value(state_at(x));
  if (!std::isfinite(f_start))
    throw std::runtime_error("objective undefined at the starting state");
  const double f_scale = std::max(1.0, std::abs(f_start));

  // Below ~1e-12 the composite can no longer be centered in doubles (the
  // line search compares values whose differences drown in rounding), so
  // that is the floor's floor regardless of how tight a gap was requested.
  const double mu_floor =
      std::min(1e-9 * f_scale,
               std::max(1e-12 * f_scale, std::abs(gap_target) / 20.0));
  double mu = (warm != nullptr) ? 1e-6 * f_scale : 1e-2 * f_scale;

  Matrix grad_f(dim, dim);
  int total_iters = 0;
  double mu_last = mu;
  const bool trace = std::getenv("DPSK_SOLVER_TRACE") != nullptr;

  for (; mu > 0.5 * mu_floor; mu *= 0.1) {
    mu_last = mu;
    // The last stage is solved to higher centrality: the multiplier fit in
    // the certificate inherits exactly that error.
    const bool final_stage = 0.1 * mu <= 0.5 * mu_floor;
    const int iter_cap = final_stage ? 24 : 14;
    int stage_iters = 0;
    double last_descent = 0.0, last_t = 0.0, last_f = 0.0;
    int stop_reason = 0;  // 1 descent<=0, 2 decrement small, 3 no move
    for (int it = 0; it < iter_cap; ++it) {
      Matrix w = state_at(x);
      // Line-search acceptance used a Cholesky test; re-derive strictness
      // here and nudge inward in the rare case rounding ate the margin.
      for (int k = 0; k < 200 && min_eig(w) <= 0.0; ++k) {
        x *= 0.99;
        w = state_at(x);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(w);
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("interior iterate left the cone");
      const RealVector lam = es.eigenvalues();
      const Matrix winv = es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
                          es.eigenvectors().adjoint();
      const double logdet = lam.array().log().sum();

      const double f_val = obj.value_grad(w, grad_f);
      const RealVector gf = basis.transpose() * hvec(grad_f);
      const RealVector g = gf + mu * (basis.transpose() * hvec(winv));

      // Exact barrier Hessian -tr(winv B_i winv B_j): stack the products
      // once so the pairwise traces become one matrix product.
      Eigen::MatrixXcd prods(dim * dim, nt);
      Eigen::MatrixXcd prods_t(dim * dim, nt);
      for (int j = 0; j < nt; ++j) {
        const Matrix pj = winv * set.tangent[j];
        prods.col(j) =
            Eigen::Map<const Eigen::VectorXcd>(pj.data(), dim * dim);
        const Matrix pjt = pj.transpose();
        prods_t.col(j) =
            Eigen::Map<const Eigen::VectorXcd>(pjt.data(), dim * dim);
      }
      const Eigen::MatrixXd hbar = -(prods.transpose() * prods_t).real();

      const Eigen::MatrixXd hobj = obj.hessian(w);
      const Eigen::MatrixXd neg_h = -(hobj + mu * hbar);
      // Regularize relative to the objective block only; the barrier block
      // is exact and however stiff it gets it must not inflate the ridge.
      double ridge = 1e-11 * (1.0 + hobj.diagonal().cwiseAbs().maxCoeff());
      RealVector d(nt);
      double descent = -1.0;
      for (int attempt = 0; attempt < 4; ++attempt) {
        const Eigen::MatrixXd reg =
            neg_h + ridge * Eigen::MatrixXd::Identity(nt, nt);
        d = reg.ldlt().solve(g);
        descent = g.dot(d);
        if (descent > 0.0) break;
        ridge *= 1e3;
      }
      last_descent = descent;
      last_f = f_val;
      if (descent <= 0.0) {
        stop_reason = 1;
        break;  // not a descent direction even heavily regularized
      }

      // The decrement approximates twice the remaining gap to the stage
      // optimum; mu itself is the natural stopping scale.
      if (descent <
          std::max((final_stage ? 1e-3 : 0.03) * mu, 1e-13 * f_scale)) {
        stop_reason = 2;
        break;
      }

      const double phi0 = f_val + mu * logdet;
      double t = 1.0;
      bool moved = false;
      while (t > 1e-13) {
        const Matrix w_try = state_at(x + t * d);
        Eigen::LLT<Matrix> llt(w_try);
        if (llt.info() == Eigen::Success) {
          const double f_try = obj.value(w_try);
          if (std::isfinite(f_try)) {
            double logdet_try = 0.0;
            for (int i = 0; i < dim; ++i)
              logdet_try += 2.0 * std::log(llt.matrixL()(i, i).real());
            if (f_try + mu * logdet_try >= phi0 + 0.25 * t * descent) {
              x += t * d;
              moved = true;
              break;
            }
          }
        }
        t *= 0.5;
      }
      ++total_iters;
      ++stage_iters;
      last_t = t;
      if (!moved) {
        stop_reason = 3;
        break;
      }
    }
    if (trace)
      std::fprintf(stderr,
                   "stage mu=%.1e iters=%d stop=%d descent=%.2e t=%.2e "
                   "f=%.10f\n",
                   mu, stage_iters, stop_reason, last_descent, last_t,
                   last_f);
  }

  MaximizerResult res;
  res.omega = state_at(x);
  res.primal = obj.value_grad(res.omega, grad_f);
  Eigen::SelfAdjointEigenSolver<Matrix> es_final(res.omega);
  const Matrix winv_final = es_final.eigenvectors() *
                            es_final.eigenvalues().cwiseInverse().asDiagonal() *
                            es_final.eigenvectors().adjoint();
  res.dual = certify_upper_bound(grad_f, res.omega, res.primal, set,
                                 gap_target, mu_last, winv_final);
  res.iterations = total_iters;
  if (trace)
    std::fprintf(stderr,
                 "final primal=%.12f dual=%.12f gap_abs=%.2e target=%.2e\n",
                 res.primal, res.dual, res.dual - res.primal, gap_target);
  return res;
}

// Key-map image and pinched reference for the entropy term, plus the chain
// rule pulling the gradient back to the input state. The tangent basis is
// pushed through the key map once at construction so second derivatives can
// be taken directly in tangent coordinates.
struct EntropyTerm {
  const KeySuperoperator* key_map = nullptr;
  double gamma = 0.0;
  std::vector<Matrix> dtau, dsigma;

  EntropyTerm(const KeySuperoperator* km, double g,
              const std::vector<Matrix>& tangent)
      : key_map(km), gamma(g) {
    dtau.reserve(tangent.size());
    dsigma.reserve(tangent.size());
    for (const Matrix& b : tangent) {
      dtau.push_back(symmetrized(key_map->apply(b)));
      dsigma.push_back(key_map->pinch(dtau.back()));
    }
  }

  double value(const Matrix& w) const {
    const Matrix tau = key_map->apply(w);
    return detail::psi_general(tau, key_map->pinch(tau), gamma).value;
  }

  double value_grad(const Matrix& w, Matrix& grad) const {
    const Matrix tau = key_map->apply(w);
    const detail::PsiGradient pg =
        detail::psi_with_gradient(tau, key_map->pinch(tau), gamma);
    const Matrix chain = pg.d_rho + key_map->pinch(pg.d_sigma);
    grad = symmetrized(key_map->kraus.adjoint() * chain * key_map->kraus);
    return pg.value;
  }

  Eigen::MatrixXd hessian(const Matrix& w) const {
    const Matrix tau = key_map->apply(w);
    return detail::psi_hessian(tau, key_map->pinch(tau), gamma, dtau, dsigma);
  }
};

SolveReport base_report(const MaximizerResult& res, const FeasibleSet& set) {
  SolveReport report;
  report.iterations = res.iterations;
  const Membership m = check_membership(set, res.omega);
  report.feasibility_residual = std::max(m.marginal_norm, m.trace_gap);
  return report;
}

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "?";
}

KeyRateProblem make_problem(const ProtocolParams& params) {
  KeyRateProblem prob;
  prob.params = params;
  prob.set =
      make_feasible_set(build_alice_marginal(params.beta, params.gamma_mod));
  prob.gammas = build_gamma_operators(params.p_k, params.p_d);
  prob.key_map = build_key_superoperator(params.p_d);
  return prob;
}

KappaSolution solve_kappa(const TradeoffFunction& f, double alpha,
                          const KeyRateProblem& prob,
                          const Matrix* warm_start) {
  check_alpha_window(alpha);
  const double scale = (alpha - 1.0) / alpha;
  const double w_cc = std::exp2(scale * f.cc);
  const double w_wc = std::exp2(scale * f.wc);
  const double w_nc = std::exp2(scale * f.nc);
  const double w_bot = prob.params.p_k * std::exp2(scale * f.bot);
  if (!std::isfinite(w_cc) || !std::isfinite(w_wc) || !std::isfinite(w_nc) ||
      !std::isfinite(w_bot))
    throw std::invalid_argument("tradeoff function entries out of range");

  const Matrix affine = w_cc * prob.gammas.gamma_cc.mat +
                        w_wc * prob.gammas.gamma_wc.mat +
                        w_nc * prob.gammas.gamma_nc.mat;
  const EntropyTerm entropy(&prob.key_map, 1.0 / alpha, prob.set.tangent);

  Objective obj;
  obj.value = [&](const Matrix& w) {
    return (affine * w).trace().real() + w_bot * entropy.value(w);
  };
  obj.value_grad = [&](const Matrix& w, Matrix& grad) {
    Matrix psi_grad;
    const double psi = entropy.value_grad(w, psi_grad);
    grad = affine + w_bot * psi_grad;
    return (affine * w).trace().real() + w_bot * psi;
  };
  obj.hessian = [&](const Matrix& w) -> Eigen::MatrixXd {
    return w_bot * entropy.hessian(w);
  };

  // How tightly the argument must be solved for the reported kappa to meet
  // the relative gap target: d kappa / d g = (alpha/(alpha-1)) / (g ln 2),
  // and the optimal argument sits near 1 for any sane tradeoff function.
  const double pref = alpha / (alpha - 1.0);
  const double gap_target = 0.5 * kGapTol * kLn2 / pref;

  const MaximizerResult res =
      maximize_concave(obj, prob.set, warm_start, gap_target);

  KappaSolution out;
  out.report = base_report(res, prob.set);
  out.omega_star = make_density(make_hermitian(prob.set.sig, res.omega));
  // alpha/(1-alpha) < 0: the certified upper bound on the argument becomes
  // the safe (lower) side of kappa and is what gets returned.
  out.kappa = (alpha / (1.0 - alpha)) * std::log2(res.dual);
  out.report.dual_value = out.kappa;
  out.report.primal_value = (alpha / (1.0 - alpha)) * std::log2(res.primal);
  out.report.gap = std::max(0.0, out.report.primal_value - out.kappa) /
                   std::max(1.0, std::abs(out.kappa));
  out.report.status = out.report.gap <= kGapTol ? SolveStatus::converged
                                                : SolveStatus::max_iter;
  return out;
}

KappaSolution solve_kappa(const TradeoffFunction& f, double alpha,
                          const ProtocolParams& params) {
  return solve_kappa(f, alpha, make_problem(params));
}

TradeoffSolution solve_tradeoff(const ClickStatistics& q, double alpha,
                                const KeyRateProblem& prob,
                                const Matrix* warm_start) {
  check_alpha_window(alpha);
  const double p_k = prob.params.p_k;
  const double total = q.q_bot + q.q_cc + q.q_wc + q.q_nc;
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("announcement distribution sums to " +
                                std::to_string(total));
  if (std::abs(q.q_bot - p_k * q.p_click) > 1e-6)
    throw std::invalid_argument(
        "q_bot inconsistent with p_k * p_click for this problem");

  double qb = q.q_bot, qcc = q.q_cc, qwc = q.q_wc, qnc = q.q_nc;
  bool smoothed = false;
  for (double* e : {&qb, &qcc, &qwc, &qnc}) {
    if (*e < kReferenceFloor) {
      *e = kReferenceFloor;
      smoothed = true;
    }
  }
  const double lifted = qb + qcc + qwc + qnc;
  qb /= lifted;
  qcc /= lifted;
  qwc /= lifted;
  qnc /= lifted;

  const double gamma = 1.0 / alpha;
  const EntropyTerm entropy(&prob.key_map, gamma, prob.set.tangent);
  const Matrix& gcc = prob.gammas.gamma_cc.mat;
  const Matrix& gwc = prob.gammas.gamma_wc.mat;
  const Matrix& gnc = prob.gammas.gamma_nc.mat;

  // Affine click probabilities have rank-one curvature in the log; their
  // tangent-coordinate vectors never change, so build them once.
  const int nt = static_cast<int>(prob.set.tangent.size());
  RealVector vcc(nt), vwc(nt), vnc(nt);
  for (int j = 0; j < nt; ++j) {
    const Matrix& b = prob.set.tangent[j];
    vcc(j) = gcc.transpose().cwiseProduct(b).sum().real();
    vwc(j) = gwc.transpose().cwiseProduct(b).sum().real();
    vnc(j) = gnc.transpose().cwiseProduct(b).sum().real();
  }

  // Maximizing this log-likelihood-style surrogate is the same program as
  // minimizing the relative-entropy objective: the entropy of q is a
  // constant and the normalization of the key-map image cancels between the
  // two divergence terms.
  Objective obj;
  obj.value = [&](const Matrix& w) {
    const double pcc = (gcc * w).trace().real();
    const double pwc = (gwc * w).trace().real();
    const double pnc = (gnc * w).trace().real();
    const double psi = entropy.value(w);
    if (pcc <= 0.0 || pwc <= 0.0 || pnc <= 0.0 || psi <= 0.0) return -kInf;
    return qcc * std::log2(pcc) + qwc * std::log2(pwc) +
           qnc * std::log2(pnc) + qb * std::log2(psi);
  };
  obj.value_grad = [&](const Matrix& w, Matrix& grad) {
    const double pcc = (gcc * w).trace().real();
    const double pwc = (gwc * w).trace().real();
    const double pnc = (gnc * w).trace().real();
    Matrix psi_grad;
    const double psi = entropy.value_grad(w, psi_grad);
    grad = (qcc / (kLn2 * pcc)) * gcc + (qwc / (kLn2 * pwc)) * gwc +
           (qnc / (kLn2 * pnc)) * gnc + (qb / (kLn2 * psi)) * psi_grad;
    return qcc * std::log2(pcc) + qwc * std::log2(pwc) +
           qnc * std::log2(pnc) + qb * std::log2(psi);
  };
  obj.hessian = [&](const Matrix& w) -> Eigen::MatrixXd {
    const double pcc = (gcc * w).trace().real();
    const double pwc = (gwc * w).trace().real();
    const double pnc = (gnc * w).trace().real();
    const Matrix tau = prob.key_map.apply(w);
    const Matrix pinched = prob.key_map.pinch(tau);
    const detail::PsiGradient pg =
        detail::psi_with_gradient(tau, pinched, gamma);
    RealVector gpsi(nt);
    for (int j = 0; j < nt; ++j)
      gpsi(j) = (pg.d_rho.transpose().cwiseProduct(entropy.dtau[j]).sum() +
                 pg.d_sigma.transpose().cwiseProduct(entropy.dsigma[j]).sum())
                    .real();
    Eigen::MatrixXd h =
        (qb / (kLn2 * pg.value)) *
        detail::psi_hessian(tau, pinched, gamma, entropy.dtau, entropy.dsigma);
    h -= (qb / (kLn2 * pg.value * pg.value)) * (gpsi * gpsi.transpose());
    h -= (qcc / (kLn2 * pcc * pcc)) * (vcc * vcc.transpose());
    h -= (qwc / (kLn2 * pwc * pwc)) * (vwc * vwc.transpose());
    h -= (qnc / (kLn2 * pnc * pnc)) * (vnc * vnc.transpose());
    return h;
  };

  // The program value scales the surrogate by 1/(1-gamma), so the surrogate
  // must be solved that much tighter than the requested relative gap.
  const double pref = 1.0 / (1.0 - gamma);
  const double c0 = qb * std::log2(qb) + qcc * std::log2(qcc) +
                    qwc * std::log2(qwc) + qnc * std::log2(qnc) -
                    qb * std::log2(p_k);
  const double gap_target = 0.5 * kGapTol / pref;

  const MaximizerResult res =
      maximize_concave(obj, prob.set, warm_start, gap_target);

  TradeoffSolution out;
  out.report = base_report(res, prob.set);
  out.report.reference_smoothed = smoothed;
  // The surrogate was maximized but the program value is a minimum: the
  // certified surrogate bound becomes the program's certified lower value.
  out.report.primal_value = pref * (c0 - res.primal);
  out.report.dual_value = pref * (c0 - res.dual);
  out.report.gap =
      std::max(0.0, out.report.primal_value - out.report.dual_value) /
      std::max(1.0, std::abs(out.report.dual_value));
  out.report.status = out.report.gap <= kGapTol ? SolveStatus::converged
                                                : SolveStatus::max_iter;
  out.value = out.report.primal_value;
  out.omega_star = make_density(make_hermitian(prob.set.sig, res.omega));

  // Optimality makes the envelope gradient of the program value with
  // respect to q available in closed form at the optimizer. Constant shifts
  // of f are a gauge freedom (they cancel against kappa), so no further
  // normalization is applied.
  const Matrix& wbar = res.omega;
  const double pcc = (gcc * wbar).trace().real();
  const double pwc = (gwc * wbar).trace().real();
  const double pnc = (gnc * wbar).trace().real();
  const double psi = entropy.value(wbar);
  out.f.cc = pref * std::log2(qcc / pcc);
  out.f.wc = pref * std::log2(qwc / pwc);
  out.f.nc = pref * std::log2(qnc / pnc);
  out.f.bot = pref * std::log2(qb / (p_k * psi));
  out.f.origin = TradeoffFunction::Origin::dual_extracted;
  return out;
}

TradeoffSolution solve_tradeoff(const ClickStatistics& q, double alpha,
                                const ProtocolParams& params) {
  return solve_tradeoff(q, alpha, make_problem(params));
}

ConeElement fast_renyi_element(double u, DensityMatrix rho, double gamma,
                               std::vector<HermitianOperator> pinch) {
  ConeElement e;
  e.family = ConeElement::Family::fast_renyi;
  e.epigraph = u;
  e.state = std::move(rho);
  e.gamma = gamma;
  e.pinch = std::move(pinch);
  return e;
}

ConeElement kl_element(double h, std::vector<double> weights,
                       std::vector<double> reference) {
  ConeElement e;
  e.family = ConeElement::Family::kl;
  e.epigraph = h;
  e.weights = std::move(weights);
  e.reference = std::move(reference);
  return e;
}

ConeElement log_element(double h, double v, double u) {
  ConeElement e;
  e.family = ConeElement::Family::log;
  e.epigraph = h;
  e.log_v = v;
  e.log_u = u;
  return e;
}

ConeCheck cone_membership(const ConeElement& elem) {
  ConeCheck check;
  switch (elem.family) {
    case ConeElement::Family::fast_renyi: {
      if (!(elem.gamma > 0.5) || !(elem.gamma < 1.0))
        throw std::invalid_argument("renyi cone index must lie in (1/2,1)");
      const Matrix& rho = elem.state.mat();
      Matrix pinched;
      if (elem.pinch.empty()) {
        pinched = rho.diagonal().asDiagonal();
      } else {
        pinched = Matrix::Zero(rho.rows(), rho.cols());
        for (const HermitianOperator& p : elem.pinch)
          pinched += p.mat * rho * p.mat;
      }
      const PsiValue psi =
          detail::psi_general(rho, symmetrized(pinched), elem.gamma);
      check.residual = elem.epigraph + psi.value;
      break;
    }
    case ConeElement::Family::kl: {
      const double div = kl_divergence(elem.weights, elem.reference);
      check.residual = elem.epigraph - div;
      break;
    }
    case ConeElement::Family::log: {
      if (elem.log_v < 0.0 || elem.log_u < 0.0) {
        check.residual = -kInf;
        break;
      }
      // Closure: v = 0 admits any u >= 0 with h <= 0.
      const double bound =
          elem.log_v == 0.0 ? 0.0
                            : elem.log_v * std::log2(elem.log_u / elem.log_v);
      check.residual = bound - elem.epigraph;
      break;
    }
  }
  check.member = check.residual >= 0.0;
  return check;
}

}  // namespace dpsk
