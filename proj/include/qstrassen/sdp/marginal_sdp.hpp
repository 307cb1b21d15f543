#pragma once

// maximize <A, X>  s.t.  tr_2 X <= rho1,  tr_1 X <= rho2,  X >= 0
// dual:    minimize <rho1, Y1> + <rho2, Y2>  s.t.  Y1 (x) I + I (x) Y2 >= A,  Y >= 0
//
// Standard form for the splitting solver: x = (X, S1, S2) with slacks,
// A(x) = (tr_2 X + S1, tr_1 X + S2) = (rho1, rho2), cost c = (-A, 0, 0).
// The solver's equality multiplier y relates to the dual above by Y = -y.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qstrassen/bipartite.hpp"
#include "qstrassen/config.hpp"
#include "qstrassen/sdp/admm.hpp"
#include "qstrassen/sdp/repair.hpp"

namespace qstrassen::sdp {

/// Structured map x -> (tr_2 X + S1, tr_1 X + S2) with a closed-form
/// (A A^*)^{-1}.
class MarginalOperator {
 public:
  MarginalOperator(Eigen::Index d1, Eigen::Index d2) : d1_(d1), d2_(d2) {}

  Blocks apply(const Blocks& x) const {
    return {kernels::partial_trace_2(x[0], d1_, d2_) + x[1], kernels::partial_trace_1(x[0], d1_, d2_) + x[2]};
  }
  Blocks adjoint(const Blocks& y) const { return {kernels::adjoint_marginal(y[0], y[1]), y[0], y[1]}; }

  // A A^* y = ((d2+1) y1 + tr(y2) I, tr(y1) I + (d1+1) y2). Traces first,
  // then each block in closed form.
  Blocks solve_normal(const Blocks& r) const {
    const double a = static_cast<double>(d2_ + 1);
    const double b = static_cast<double>(d1_ + 1);
    const double dd1 = static_cast<double>(d1_);
    const double dd2 = static_cast<double>(d2_);
    const double tr1 = r[0].trace().real();
    const double tr2 = r[1].trace().real();
    const double det = a * b - dd1 * dd2;
    const double t1 = (b * tr1 - dd1 * tr2) / det;
    const double t2 = (tr2 - dd2 * t1) / b;
    CMatrix y1 = r[0];
    y1.diagonal().array() -= t2;
    CMatrix y2 = r[1];
    y2.diagonal().array() -= t1;
    return {y1 / a, y2 / b};
  }

  std::vector<Eigen::Index> primal_dims() const { return {d1_ * d2_, d1_, d2_}; }
  std::vector<Eigen::Index> constraint_dims() const { return {d1_, d2_}; }

 private:
  Eigen::Index d1_;
  Eigen::Index d2_;
};

struct MarginalSdpProblem {
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
  HermitianOperator objective;  ///< A; a projector, or a compression of one
  HermitianOperator rho1;
  HermitianOperator rho2;
  bool require_equal_traces = true;  ///< off for truncated (subnormalized) levels
};

struct Residuals {
  double psd_violation = 0.0;         ///< max(0, -lambda_min(X))
  double constraint_violation = 0.0;  ///< max over blocks of max(0, lambda_max(marginal - rho))
  double adjoint_violation = 0.0;     ///< max(0, -lambda_min(Phi^*(Y) - A))
};

/// Warm-start payload in the coordinates of the restricted problem, plus the
/// restriction itself so a later level can map it through the full space.
struct MarginalWarmStart {
  AdmmState state;
  CMatrix u1;
  CMatrix u2;
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
};

struct MarginalSdpSolution {
  BipartiteOperator x;
  HermitianOperator y1;
  HermitianOperator y2;
  double primal_value = 0.0;  ///< certified: attained by the feasible x
  double dual_value = 0.0;    ///< certified: <B, Y> for the feasible Y of the restricted problem
  double gap = 0.0;
  Residuals residuals;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
  double seconds = 0.0;
  std::vector<double> primal_history;  ///< best feasible value at each certificate check
  std::vector<double> dual_history;    ///< best dual bound at each certificate check
  MarginalWarmStart warm;
};

namespace detail {

inline constexpr int kWarmTrialIters = 300;
inline constexpr Eigen::Index kRestrictedMaxRank = 48;

inline void check_problem(const MarginalSdpProblem& p) {
  if (p.d1 < 1 || p.d2 < 1) throw DimensionError("marginal SDP: dimensions must be positive");
  if (p.rho1.dim() != p.d1 || p.rho2.dim() != p.d2) throw DimensionError("marginal SDP: marginal dimension mismatch");
  if (p.objective.dim() != p.d1 * p.d2) throw DimensionError("marginal SDP: objective dimension mismatch");
  const double t1 = p.rho1.trace();
  const double t2 = p.rho2.trace();
  if (p.require_equal_traces && std::abs(t1 - t2) > 1e-9 * std::max(1.0, std::abs(t1)))
    throw InvariantError("Sigma membership", std::abs(t1 - t2), "tr rho1 must equal tr rho2");
  for (const auto* r : {&p.rho1, &p.rho2}) {
    const double lmin = min_eigenvalue(*r);
    if (lmin < -1e-9 * std::max(1.0, t1)) throw InvariantError("marginal PSD", -lmin);
  }
}

/// Tracks the best certified primal and dual points of the restricted
/// problem.
class MarginalCertifier {
 public:
  MarginalCertifier(const CMatrix& a, const CMatrix& rho1, const CMatrix& rho2, double gap_tol)
      : a_(a), rho1_(rho1), rho2_(rho2), w1_(rho1), w2_(rho2), d1_(rho1.rows()), d2_(rho2.rows()), gap_tol_(gap_tol) {
    best_x_ = CMatrix::Zero(d1_ * d2_, d1_ * d2_);
    best_primal_ = 0.0;
    // Range of A when it is small: iterates compressed onto it are a second
    // repair candidate (the optimum often lives there).
    const auto ea = hermitian_eig_matrix(a_);
    Eigen::Index ra = 0;
    while (ra < ea.values.size() && ea.values(ra) > 1e-9 * std::max(1.0, ea.values(0))) ++ra;
    if (ra > 0 && 2 * ra <= ea.values.size()) range_ = ea.vectors.leftCols(ra);
    // Top eigenspace of A: a coupling living there attains the trivial dual
    // bound, and a small alternating-projection search usually finds it.
    Eigen::Index rt = 0;
    while (rt < ea.values.size() && ea.values(rt) >= ea.values(0) * (1.0 - 1e-9)) ++rt;
    if (ea.values(0) > 0.0 && rt * rt <= 2 * (d1_ * d1_ + d2_ * d2_) && rt <= kRestrictedMaxRank)
      consider(dominate(restricted_coupling(ea.vectors.leftCols(rt), rho1_, rho2_), w1_, w2_, d1_, d2_));
    // Y = (lambda_max(A) I, 0) or (0, lambda_max(A) I) is always feasible.
    const double amax = std::max(0.0, max_eigenvalue(a_));
    best_y1_ = CMatrix::Zero(d1_, d1_);
    best_y2_ = CMatrix::Zero(d2_, d2_);
    if (rho1_.trace().real() <= rho2_.trace().real()) {
      best_y1_.setIdentity();
      best_y1_ *= amax;
      best_dual_ = amax * rho1_.trace().real();
    } else {
      best_y2_.setIdentity();
      best_y2_ *= amax;
      best_dual_ = amax * rho2_.trace().real();
    }
  }

  /// Repairs an approximate primal iterate and keeps it if it improves.
  void consider_iterate(const CMatrix& x) {
    consider(dominate(x, w1_, w2_, d1_, d2_));
    if (range_.cols() > 0) {
      const CMatrix g = range_.adjoint() * x * range_;
      consider(dominate(CMatrix(range_ * g * range_.adjoint()), w1_, w2_, d1_, d2_));
    }
  }

  bool operator()(const Blocks& x, const Blocks& y) {
    consider_iterate(x[0]);

    CMatrix y1 = jordan_split(CMatrix(-y[0])).first;
    const CMatrix y2 = jordan_split(CMatrix(-y[1])).first;
    const double delta = std::max(0.0, -min_eigenvalue(CMatrix(kernels::adjoint_marginal(y1, y2) - a_)));
    y1.diagonal().array() += delta;
    const double dv = qstrassen::inner(rho1_, y1) + qstrassen::inner(rho2_, y2);
    if (dv < best_dual_) {
      best_dual_ = dv;
      best_y1_ = y1;
      best_y2_ = y2;
    }
    history_.push_back(best_primal_);
    dual_history_.push_back(best_dual_);
    return best_dual_ - best_primal_ <= gap_tol_;
  }

  void consider(const CMatrix& xr) {
    const double pv = qstrassen::inner(a_, xr);
    if (pv > best_primal_) {
      best_primal_ = pv;
      best_x_ = xr;
    }
  }

  double best_primal() const { return best_primal_; }
  double best_dual() const { return best_dual_; }
  const CMatrix& best_x() const { return best_x_; }
  const CMatrix& best_y1() const { return best_y1_; }
  const CMatrix& best_y2() const { return best_y2_; }
  const std::vector<double>& history() const { return history_; }
  const std::vector<double>& dual_history() const { return dual_history_; }

 private:
  CMatrix a_;
  CMatrix rho1_;
  CMatrix rho2_;
  Whitener w1_;
  Whitener w2_;
  Eigen::Index d1_;
  Eigen::Index d2_;
  double gap_tol_;
  CMatrix range_;
  CMatrix best_x_;
  double best_primal_;
  CMatrix best_y1_;
  CMatrix best_y2_;
  double best_dual_;
  std::vector<double> history_;
  std::vector<double> dual_history_;
};

inline bool is_full(const CMatrix& u) { return u.cols() == u.rows(); }

/// Extends a dual point of the restricted problem to the full space:
/// Y_i = U_i Y_i' U_i^* + c (I - U_i U_i^*), growing c until
/// Phi^*(Y) >= A - tol I.
inline std::pair<CMatrix, CMatrix> extend_dual(const CMatrix& y1r, const CMatrix& y2r, const CMatrix& u1,
                                               const CMatrix& u2, const CMatrix& a_full, double tol) {
  const Eigen::Index d1 = u1.rows();
  const Eigen::Index d2 = u2.rows();
  const CMatrix base1 = u1 * y1r * u1.adjoint();
  const CMatrix base2 = u2 * y2r * u2.adjoint();
  if (is_full(u1) && is_full(u2)) return {base1, base2};
  const CMatrix perp1 = CMatrix::Identity(d1, d1) - u1 * u1.adjoint();
  const CMatrix perp2 = CMatrix::Identity(d2, d2) - u2 * u2.adjoint();
  double c = 1.0;
  for (int k = 0; k < 40; ++k, c *= 4.0) {
    const CMatrix y1 = base1 + c * perp1;
    const CMatrix y2 = base2 + c * perp2;
    if (min_eigenvalue(CMatrix(kernels::adjoint_marginal(y1, y2) - a_full)) >= -tol) return {y1, y2};
  }
  return {base1 + c * perp1, base2 + c * perp2};
}

}  // namespace detail

/// Solves the marginal SDP after restricting to supp rho1 (x) supp rho2.
/// `warm` may come from a problem of different size; it is mapped through the
/// full space (zero padded) when the shapes differ.
inline MarginalSdpSolution solve_marginal_sdp(const MarginalSdpProblem& p, const SolverConfig& cfg = {},
                                              const MarginalWarmStart* warm = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::check_problem(p);
  MarginalSdpSolution sol;
  const Eigen::Index d1 = p.d1;
  const Eigen::Index d2 = p.d2;

  const CMatrix u1 = support_basis(p.rho1.matrix());
  const CMatrix u2 = support_basis(p.rho2.matrix());
  if (u1.cols() == 0 || u2.cols() == 0) {
    // Zero marginals: X = 0 is the only feasible point; Y = 0 certifies it.
    sol.x = BipartiteOperator::zero(d1, d2);
    sol.y1 = HermitianOperator::zero(d1);
    sol.y2 = HermitianOperator::zero(d2);
    auto [e1, e2] = detail::extend_dual(CMatrix::Zero(0, 0), CMatrix::Zero(0, 0), u1, u2, p.objective.matrix(), 1e-9);
    sol.y1 = HermitianOperator(e1);
    sol.y2 = HermitianOperator(e2);
    sol.dual_value = inner(p.rho1.matrix(), e1) + inner(p.rho2.matrix(), e2);
    sol.gap = std::abs(sol.dual_value);
    sol.status = SolveStatus::Optimal;
    return sol;
  }
  const bool full = detail::is_full(u1) && detail::is_full(u2);
  const Eigen::Index r1 = u1.cols();
  const Eigen::Index r2 = u2.cols();
  const CMatrix a = full ? p.objective.matrix() : kernels::compress(p.objective.matrix(), u1, u2);
  const CMatrix rho1 = full ? p.rho1.matrix() : CMatrix(u1.adjoint() * p.rho1.matrix() * u1);
  const CMatrix rho2 = full ? p.rho2.matrix() : CMatrix(u2.adjoint() * p.rho2.matrix() * u2);
  const CMatrix ur1 = full ? CMatrix::Identity(d1, d1) : u1;
  const CMatrix ur2 = full ? CMatrix::Identity(d2, d2) : u2;

  const MarginalOperator op(r1, r2);
  const Blocks c{CMatrix(-a), CMatrix::Zero(r1, r1), CMatrix::Zero(r2, r2)};
  const Blocks b{rho1, rho2};
  detail::MarginalCertifier cert(a, rho1, rho2, cfg.gap_tol);

  // Warm start: map the previous X (and multipliers) into these coordinates.
  std::optional<AdmmState> init;
  if (warm != nullptr && cfg.warm_start && !warm->state.x.empty()) {
    AdmmState s;
    const bool same = warm->d1 == d1 && warm->d2 == d2 && warm->u1.cols() == r1 && warm->u2.cols() == r2 &&
                      warm->u1.isApprox(ur1) && warm->u2.isApprox(ur2);
    if (same) {
      s = warm->state;
    } else {
      // previous restricted -> previous full -> zero padded -> current restricted
      auto lift = [&](const CMatrix& m, const CMatrix& uprev, Eigen::Index dprev, const CMatrix& ucur,
                      Eigen::Index dcur) {
        CMatrix full_prev = uprev * m * uprev.adjoint();
        CMatrix padded = CMatrix::Zero(dcur, dcur);
        const Eigen::Index k = std::min(dprev, dcur);
        padded.topLeftCorner(k, k) = full_prev.topLeftCorner(k, k);
        return CMatrix(ucur.adjoint() * padded * ucur);
      };
      auto lift_x = [&](const CMatrix& m) {
        CMatrix full_prev = kernels::expand(m, warm->u1, warm->u2);
        CMatrix padded = CMatrix::Zero(d1 * d2, d1 * d2);
        const Eigen::Index k1 = std::min(warm->d1, d1);
        const Eigen::Index k2 = std::min(warm->d2, d2);
        const auto pi = truncation_indices(k1, k2, warm->d2);
        const auto ci = truncation_indices(k1, k2, d2);
        for (std::size_t r = 0; r < pi.size(); ++r)
          for (std::size_t q = 0; q < pi.size(); ++q) padded(ci[r], ci[q]) = full_prev(pi[r], pi[q]);
        return kernels::compress(padded, ur1, ur2);
      };
      s.x = {lift_x(warm->state.x[0]), lift(warm->state.x[1], warm->u1, warm->d1, ur1, d1),
             lift(warm->state.x[2], warm->u2, warm->d2, ur2, d2)};
      s.z = {lift_x(warm->state.z[0]), lift(warm->state.z[1], warm->u1, warm->d1, ur1, d1),
             lift(warm->state.z[2], warm->u2, warm->d2, ur2, d2)};
      s.y = {lift(warm->state.y[0], warm->u1, warm->d1, ur1, d1), lift(warm->state.y[1], warm->u2, warm->d2, ur2, d2)};
      s.penalty = warm->state.penalty;
    }
    init = std::move(s);
  }

  // A warm state either finishes quickly or tends to stall; after a short
  // trial the solve restarts cold, keeping the certifier's best points.
  AdmmOutcome out;
  int trial_iters = 0;
  if (init) {
    SolverConfig trial = cfg;
    trial.max_iters = std::min(cfg.max_iters, detail::kWarmTrialIters);
    out = run_admm(op, c, b, trial, cert, &*init);
    trial_iters = out.iterations;
  }
  if (!init || (out.status != SolveStatus::Optimal && trial_iters < cfg.max_iters)) {
    SolverConfig rest = cfg;
    rest.max_iters = cfg.max_iters - trial_iters;
    out = run_admm(op, c, b, rest, cert);
    out.iterations += trial_iters;
  }

  sol.iterations = out.iterations;
  sol.status = out.status;
  sol.primal_value = cert.best_primal();
  sol.dual_value = cert.best_dual();
  sol.gap = std::abs(sol.dual_value - sol.primal_value);
  if (sol.status == SolveStatus::Optimal && sol.gap > cfg.gap_tol) sol.status = SolveStatus::MaxIters;
  sol.primal_history = cert.history();
  sol.dual_history = cert.dual_history();
  sol.warm = MarginalWarmStart{out.state, ur1, ur2, d1, d2};

  const CMatrix x_full = full ? cert.best_x() : kernels::expand(cert.best_x(), u1, u2);
  sol.x = BipartiteOperator(d1, d2, x_full);
  auto [y1, y2] = full ? std::pair<CMatrix, CMatrix>{cert.best_y1(), cert.best_y2()}
                       : detail::extend_dual(cert.best_y1(), cert.best_y2(), u1, u2, p.objective.matrix(), 1e-9);
  sol.y1 = HermitianOperator(y1);
  sol.y2 = HermitianOperator(y2);

  sol.residuals.psd_violation = std::max(0.0, -min_eigenvalue(sol.x.op()));
  const auto [m1, m2] = marginal_pair(sol.x);
  sol.residuals.constraint_violation =
      std::max({0.0, max_eigenvalue(CMatrix(m1.matrix() - p.rho1.matrix())),
                max_eigenvalue(CMatrix(m2.matrix() - p.rho2.matrix()))});
  sol.residuals.adjoint_violation =
      std::max(0.0, -min_eigenvalue(CMatrix(kernels::adjoint_marginal(y1, y2) - p.objective.matrix())));
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

struct DualityCertificateReport {
  bool trivial_feasible = false;   ///< Y = (I, I): Phi^*(Y) = 2I >= A
  double trivial_value = 0.0;      ///< tr rho1 + tr rho2
  double trivial_margin = 0.0;     ///< lambda_min(2I - A)
  bool returned_feasible = false;  ///< Phi^*(Y) >= A - 1e-7 I
  double returned_margin = 0.0;    ///< lambda_min(Phi^*(Y) - A)
  bool weak_duality = false;       ///< <B, Y> >= primal_value - 1e-7
  double dual_objective = 0.0;     ///< <B, Y> for the returned Y
  bool y_psd = false;
  bool all_pass = false;
};

inline DualityCertificateReport verify_duality_certificates(const MarginalSdpProblem& p, const MarginalSdpSolution& s) {
  DualityCertificateReport r;
  const Eigen::Index d1 = p.d1;
  const Eigen::Index d2 = p.d2;
  const CMatrix id1 = CMatrix::Identity(d1, d1);
  const CMatrix id2 = CMatrix::Identity(d2, d2);
  r.trivial_margin = min_eigenvalue(CMatrix(kernels::adjoint_marginal(id1, id2) - p.objective.matrix()));
  r.trivial_feasible = r.trivial_margin >= 0.0;
  r.trivial_value = p.rho1.trace() + p.rho2.trace();
  r.returned_margin =
      min_eigenvalue(CMatrix(kernels::adjoint_marginal(s.y1.matrix(), s.y2.matrix()) - p.objective.matrix()));
  r.returned_feasible = r.returned_margin >= -1e-7;
  r.y_psd = min_eigenvalue(s.y1) >= -1e-9 && min_eigenvalue(s.y2) >= -1e-9;
  r.dual_objective = inner(p.rho1, s.y1) + inner(p.rho2, s.y2);
  r.weak_duality = r.dual_objective >= s.primal_value - 1e-7;
  r.all_pass = r.trivial_feasible && r.returned_feasible && r.weak_duality && r.y_psd;
  return r;
}

}  // namespace qstrassen::sdp
