#pragma once

// min f(X) = ||tr_2 X - rho1||_1 + ||tr_1 X - rho2||_1  over X >= 0 supported
// in span(V), with the a-priori bound tr X <= ||rho1||_1 + ||rho2||_1.
//
// X = V G V^*. Each trace norm is split as marginal - rho = P - N with P, N >= 0
// and cost tr P + tr N, which is exact at the optimum. Blocks:
//   x = (G, P1, N1, P2, N2, s)
//   tr_2(V G V^*) - P1 + N1 = rho1
//   tr_1(V G V^*) - P2 + N2 = rho2
//   tr G + s              = cap

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qstrassen/bipartite.hpp"
#include "qstrassen/config.hpp"
#include "qstrassen/sdp/admm.hpp"
#include "qstrassen/sdp/dense_operator.hpp"

namespace qstrassen::sdp {

/// f(X) = ||tr_2 X - rho1||_1 + ||tr_1 X - rho2||_1
inline double f_value(const CMatrix& x, const CMatrix& rho1, const CMatrix& rho2) {
  const Eigen::Index d1 = rho1.rows();
  const Eigen::Index d2 = rho2.rows();
  return trace_norm_hermitian(CMatrix(kernels::partial_trace_2(x, d1, d2) - rho1)) +
         trace_norm_hermitian(CMatrix(kernels::partial_trace_1(x, d1, d2) - rho2));
}

struct FMinSolution {
  double value = 0.0;        ///< f at the returned argmin (certified upper bound)
  double lower_bound = 0.0;  ///< certified lower bound on the minimum
  double gap = 0.0;
  BipartiteOperator argmin;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
  double seconds = 0.0;
  AdmmState warm;
};

namespace detail {

inline CMatrix clip_unit(const CMatrix& w) {
  const auto e = hermitian_eig_matrix(w);
  return spectral_apply(e, [](double v) { return std::clamp(v, -1.0, 1.0); });
}

/// Pads a warm state from a basis of size k to size k' >= k (G block only
/// changes shape).
inline AdmmState pad_f_state(const AdmmState& s, Eigen::Index k) {
  AdmmState out = s;
  auto pad = [k](const CMatrix& m) {
    CMatrix p = CMatrix::Zero(k, k);
    const Eigen::Index r = std::min(k, m.rows());
    p.topLeftCorner(r, r) = m.topLeftCorner(r, r);
    return p;
  };
  out.x[0] = pad(s.x[0]);
  out.z[0] = pad(s.z[0]);
  return out;
}

}  // namespace detail

/// `basis`: orthonormal columns spanning the admissible subspace of
/// C^{d1} (x) C^{d2}.
inline FMinSolution solve_f_min(const HermitianOperator& rho1, const HermitianOperator& rho2, const CMatrix& basis,
                                const SolverConfig& cfg = {}, const AdmmState* warm = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index d1 = rho1.dim();
  const Eigen::Index d2 = rho2.dim();
  const Eigen::Index k = basis.cols();
  if (k < 1) throw InvariantError("nonempty subspace", 0.0);
  if (basis.rows() != d1 * d2) throw DimensionError("solve_f_min: basis length must equal d1*d2");
  for (const auto* r : {&rho1, &rho2}) {
    const double lmin = min_eigenvalue(*r);
    if (lmin < -1e-9) throw InvariantError("marginal PSD", -lmin);
  }
  const double cap = trace_norm(rho1) + trace_norm(rho2);
  const CMatrix& v = basis;
  const CMatrix vh = basis.adjoint();

  const std::vector<Eigen::Index> pdims{k, d1, d1, d2, d2, 1};
  const std::vector<Eigen::Index> cdims{d1, d2, 1};
  const DenseOperator op(pdims, cdims, [&](const Blocks& x) {
    const CMatrix big = v * x[0] * vh;
    Blocks out{kernels::partial_trace_2(big, d1, d2) - x[1] + x[2], kernels::partial_trace_1(big, d1, d2) - x[3] + x[4],
               CMatrix::Constant(1, 1, x[0].trace() + x[5](0, 0))};
    return out;
  });
  const Blocks c{CMatrix::Zero(k, k),       CMatrix::Identity(d1, d1), CMatrix::Identity(d1, d1),
                 CMatrix::Identity(d2, d2), CMatrix::Identity(d2, d2), CMatrix::Zero(1, 1)};
  const Blocks b{rho1.matrix(), rho2.matrix(), CMatrix::Constant(1, 1, cap)};

  double best_ub = f_value(CMatrix::Zero(d1 * d2, d1 * d2), rho1.matrix(), rho2.matrix());
  CMatrix best_g = CMatrix::Zero(k, k);
  double best_lb = 0.0;  // f >= 0
  auto certify = [&](const Blocks& x, const Blocks& y) {
    // x[0] is PSD (cone projection) but may exceed the cap slightly; f is
    // finite everywhere so any PSD G is an admissible upper bound.
    const CMatrix g = x[0];
    const double ub = f_value(CMatrix(v * g * vh), rho1.matrix(), rho2.matrix());
    if (ub < best_ub) {
      best_ub = ub;
      best_g = g;
    }
    // With W_i = clip(-y_i) (so ||W_i||_inf <= 1) and any X = V G V^*, tr G <= cap:
    //   f(X) >= -<W1, rho1> - <W2, rho2> + <V^*(W1 x I + I x W2) V, G>
    //        >= -<W1, rho1> - <W2, rho2> + cap * min(0, lambda_min(...)).
    // Restricting to tr G <= cap loses nothing: every minimizer satisfies it.
    const CMatrix w1 = detail::clip_unit(CMatrix(-y[0]));
    const CMatrix w2 = detail::clip_unit(CMatrix(-y[1]));
    const CMatrix m = vh * kernels::adjoint_marginal(w1, w2) * v;
    const double lam = min_eigenvalue(CMatrix(0.5 * (m + m.adjoint())));
    const double lb = -qstrassen::inner(w1, rho1.matrix()) - qstrassen::inner(w2, rho2.matrix()) + cap * std::min(0.0, lam);
    best_lb = std::max(best_lb, lb);
    return best_ub - best_lb <= cfg.gap_tol;
  };

  std::optional<AdmmState> init;
  if (warm != nullptr && cfg.warm_start && !warm->x.empty()) init = detail::pad_f_state(*warm, k);
  const AdmmOutcome out = run_admm(op, c, b, cfg, certify, init ? &*init : nullptr);

  FMinSolution sol;
  sol.value = best_ub;
  sol.lower_bound = std::min(best_lb, best_ub);
  sol.gap = best_ub - sol.lower_bound;
  sol.argmin = BipartiteOperator(d1, d2, CMatrix(v * best_g * vh));
  sol.iterations = out.iterations;
  sol.status = out.status;
  if (sol.status == SolveStatus::Optimal && sol.gap > cfg.gap_tol) sol.status = SolveStatus::MaxIters;
  sol.warm = out.state;
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace qstrassen::sdp
