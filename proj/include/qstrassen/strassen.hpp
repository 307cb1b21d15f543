#pragma once

// Coupling existence for (rho1, rho2) with support in a subspace X:
// direct overlap maximization, the two truncation ladders, and the classical
// transportation special case.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qstrassen/bipartite.hpp"
#include "qstrassen/config.hpp"
#include "qstrassen/flow.hpp"
#include "qstrassen/sdp/f_min.hpp"
#include "qstrassen/sdp/marginal_sdp.hpp"

namespace qstrassen {

using sdp::SolveStatus;

struct MuResult {
  double value = 0.0;        ///< certified lower bound (attained by a feasible X)
  double upper_bound = 0.0;  ///< certified upper bound (dual)
  sdp::MarginalSdpProblem problem;
  sdp::MarginalSdpSolution solution;
};

namespace detail {

inline void check_pair(const DensityOperator& rho1, const DensityOperator& rho2, const Subspace& x) {
  const double t1 = rho1.op().trace();
  const double t2 = rho2.op().trace();
  if (std::abs(t1 - t2) > 1e-9) throw InvariantError("Sigma membership", std::abs(t1 - t2), "tr rho1 must equal tr rho2");
  if (x.ambient_dim() != rho1.dim() * rho2.dim())
    throw DimensionError("subspace ambient dimension must equal d1*d2");
}

}  // namespace detail

/// max <P_X, X> over X >= 0 with tr_2 X <= rho1, tr_1 X <= rho2.
inline MuResult mu(const DensityOperator& rho1, const DensityOperator& rho2, const Subspace& x,
                   const SolverConfig& cfg = {}, const sdp::MarginalWarmStart* warm = nullptr) {
  detail::check_pair(rho1, rho2, x);
  MuResult r;
  r.problem = {rho1.dim(), rho2.dim(), x.projector(), rho1.op(), rho2.op(), true};
  r.solution = sdp::solve_marginal_sdp(r.problem, cfg, warm);
  r.value = r.solution.primal_value;
  r.upper_bound = r.solution.dual_value;
  return r;
}

struct CouplingVerdict {
  bool exists = false;
  bool conclusive = false;  ///< false when the certified interval straddles 1 - eps
  std::optional<DensityOperator> certificate;
  double mu = 0.0;
  double mu_upper = 0.0;
  double marginal_error = 0.0;  ///< ||tr_2 r - rho1||_1 + ||tr_1 r - rho2||_1 for the normalized optimizer
  double support_leak = 0.0;    ///< ||(I - P) r (I - P)||_1
  MuResult detail;
};

namespace detail {

struct CertificateCheck {
  CMatrix state;
  double marginal_error = 0.0;
  double support_leak = 0.0;
};

inline CertificateCheck check_certificate(const CMatrix& x, const Subspace& sub, const CMatrix& rho1,
                                          const CMatrix& rho2) {
  const CMatrix& p = sub.projector().matrix();
  // Compress onto X: removes the residual leak left by the solver.
  CMatrix px = p * x * p;
  px = 0.5 * (px + px.adjoint());
  CertificateCheck c;
  c.state = px / px.trace().real();
  const CMatrix q = CMatrix::Identity(p.rows(), p.cols()) - p;
  c.support_leak = trace_norm_hermitian(CMatrix(q * c.state * q));
  c.marginal_error = sdp::f_value(c.state, rho1, rho2);
  return c;
}

}  // namespace detail

/// Declares a coupling when mu >= 1 - eps and the normalized optimizer,
/// compressed onto X, reproduces the marginals within 10 eps.
inline CouplingVerdict has_coupling(const DensityOperator& rho1, const DensityOperator& rho2, const Subspace& x,
                                    const SolverConfig& cfg = {}) {
  CouplingVerdict v;
  v.detail = mu(rho1, rho2, x, cfg);
  v.mu = v.detail.value;
  v.mu_upper = v.detail.upper_bound;
  const double threshold = 1.0 - cfg.eps_decision;
  const double tr = v.detail.solution.x.trace();
  if (v.mu >= threshold && tr > 0.0) {
    auto c = detail::check_certificate(v.detail.solution.x.matrix(), x, rho1.matrix(), rho2.matrix());
    v.marginal_error = c.marginal_error;
    v.support_leak = c.support_leak;
    if (c.support_leak <= 1e-7 && c.marginal_error <= 10.0 * cfg.eps_decision) {
      v.exists = true;
      v.conclusive = true;
      v.certificate.emplace(HermitianOperator(c.state), 1.0, 1e-7);
      return v;
    }
  }
  v.exists = false;
  v.conclusive = v.mu_upper < threshold;
  return v;
}

enum class LadderVerdict { CouplingExists, NoCoupling, Undecided };
enum class LadderCriterion { FLadder, SdpLadder };

inline const char* to_string(LadderVerdict v) {
  switch (v) {
    case LadderVerdict::CouplingExists: return "coupling_exists";
    case LadderVerdict::NoCoupling: return "no_coupling";
    case LadderVerdict::Undecided: return "undecided";
  }
  return "undecided";
}
inline const char* to_string(LadderCriterion c) { return c == LadderCriterion::FLadder ? "f_ladder" : "sdp_ladder"; }

struct LadderLevel {
  int n = 0;
  bool skipped = false;    ///< truncated subspace lost dimension; not solved
  double value = 0.0;      ///< f_ladder: attained f; sdp_ladder: attained overlap
  double lower = 0.0;      ///< certified lower bound on the level optimum
  double upper = 0.0;      ///< certified upper bound on the level optimum
  double gap = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  /// sdp_ladder: min of lambda_min over X, rho1_n - tr_2 X, rho2_n - tr_1 X.
  double domination_margin = 0.0;
};

struct LadderReport {
  LadderCriterion criterion = LadderCriterion::FLadder;
  std::vector<LadderLevel> levels;
  LadderVerdict verdict = LadderVerdict::Undecided;
  double eps_decision = 0.0;
  double scale = 1.0;  ///< inputs were divided by this before solving
  int window = 0;

  std::vector<const LadderLevel*> solved() const {
    std::vector<const LadderLevel*> out;
    for (const auto& l : levels)
      if (!l.skipped) out.push_back(&l);
    return out;
  }
};

/// mu_n = min f over PSD operators on span(x_1..x_n), n = 1..n_max.
inline LadderReport f_ladder(const HermitianOperator& rho1_in, const HermitianOperator& rho2_in, const CMatrix& basis,
                             int n_max, const SolverConfig& cfg = {}) {
  if (n_max < 1 || n_max > basis.cols()) throw DimensionError("f_ladder: n_max out of range");
  if (basis.rows() != rho1_in.dim() * rho2_in.dim()) throw DimensionError("f_ladder: basis length must equal d1*d2");
  const double defect = orthonormality_defect(basis);
  if (defect > 1e-8) throw InvariantError("orthonormal basis", defect);
  const double t1 = rho1_in.trace();
  const double t2 = rho2_in.trace();
  if (std::abs(t1 - t2) > 1e-9 * std::max(1.0, t1)) throw InvariantError("Sigma membership", std::abs(t1 - t2));
  if (!(t1 > 0.0)) throw InvariantError("positive trace", t1);

  LadderReport rep;
  rep.criterion = LadderCriterion::FLadder;
  rep.eps_decision = cfg.eps_decision;
  rep.scale = t1;
  const HermitianOperator rho1(rho1_in.matrix() / t1);
  const HermitianOperator rho2(rho2_in.matrix() / t1);

  std::optional<sdp::AdmmState> warm;
  for (int n = 1; n <= n_max; ++n) {
    const auto s = sdp::solve_f_min(rho1, rho2, basis.leftCols(n), cfg, warm ? &*warm : nullptr);
    LadderLevel l;
    l.n = n;
    l.value = s.value;
    l.upper = s.value;
    l.lower = s.lower_bound;
    l.gap = s.gap;
    l.iterations = s.iterations;
    l.seconds = s.seconds;
    l.status = s.status;
    rep.levels.push_back(l);
    if (cfg.warm_start) warm = s.warm;
  }

  const auto& top = rep.levels.back();
  const double eps = cfg.eps_decision;
  if (top.value < eps) {
    rep.verdict = LadderVerdict::CouplingExists;
  } else if (n_max == basis.cols()) {
    // The whole subspace is explored: a positive certified minimum rules a coupling out.
    rep.window = 1;
    rep.verdict = top.lower > eps ? LadderVerdict::NoCoupling : LadderVerdict::Undecided;
  } else {
    const int w = std::min<int>(5, static_cast<int>(rep.levels.size()));
    rep.window = w;
    bool stalled = true;
    for (int i = static_cast<int>(rep.levels.size()) - w; i < static_cast<int>(rep.levels.size()); ++i) {
      const auto& l = rep.levels[static_cast<std::size_t>(i)];
      if (!(l.lower > eps) || l.value - top.value > cfg.gap_tol) stalled = false;
    }
    rep.verdict = stalled ? LadderVerdict::NoCoupling : LadderVerdict::Undecided;
  }
  return rep;
}

/// The level-n instance: leading n x n blocks of the marginals and the
/// truncated subspace, re-orthonormalized (empty optional when it lost rank).
struct TruncatedLevel {
  HermitianOperator rho1;
  HermitianOperator rho2;
  std::optional<Subspace> x;
};

inline TruncatedLevel truncate_level(const HermitianOperator& rho1, const HermitianOperator& rho2, const Subspace& x,
                                     int n) {
  const Eigen::Index d2 = rho2.dim();
  TruncatedLevel t{HermitianOperator(CMatrix(rho1.matrix().topLeftCorner(n, n))),
                   HermitianOperator(CMatrix(rho2.matrix().topLeftCorner(n, n))), std::nullopt};
  const auto idx = truncation_indices(n, n, d2);
  CMatrix raw(static_cast<Eigen::Index>(idx.size()), x.dim());
  for (std::size_t r = 0; r < idx.size(); ++r) raw.row(static_cast<Eigen::Index>(r)) = x.basis().row(idx[r]);
  CMatrix basis = orthonormalize_columns(raw);
  if (basis.cols() == x.dim()) t.x.emplace(static_cast<Eigen::Index>(n) * n, std::move(basis));
  return t;
}

/// mu_n = max <P_{X_n}, X> under the truncated marginals, n in `levels`
/// (default 1..n_max).
inline LadderReport sdp_ladder(const DensityOperator& rho1, const DensityOperator& rho2, const Subspace& x, int n_max,
                               const SolverConfig& cfg = {}, std::vector<int> levels = {}) {
  detail::check_pair(rho1, rho2, x);
  const Eigen::Index big1 = rho1.dim();
  const Eigen::Index big2 = rho2.dim();
  if (n_max < 1 || n_max > std::min(big1, big2)) throw DimensionError("sdp_ladder: n_max out of range");
  if (levels.empty())
    for (int n = 1; n <= n_max; ++n) levels.push_back(n);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.front() < 1 || levels.back() > n_max) throw DimensionError("sdp_ladder: level out of range");

  LadderReport rep;
  rep.criterion = LadderCriterion::SdpLadder;
  rep.eps_decision = cfg.eps_decision;
  std::optional<sdp::MarginalWarmStart> warm;
  bool top_untruncated = false;
  for (int n : levels) {
    LadderLevel l;
    l.n = n;
    const auto t = truncate_level(rho1.op(), rho2.op(), x, n);
    if (!t.x) {
      l.skipped = true;
      rep.levels.push_back(l);
      continue;
    }
    sdp::MarginalSdpProblem p{n, n, t.x->projector(), t.rho1, t.rho2, false};
    const auto s = sdp::solve_marginal_sdp(p, cfg, warm ? &*warm : nullptr);
    l.value = s.primal_value;
    l.lower = s.primal_value;
    l.upper = s.dual_value;
    l.gap = s.gap;
    l.iterations = s.iterations;
    l.seconds = s.seconds;
    l.status = s.status;
    const auto [m1, m2] = marginal_pair(s.x);
    l.domination_margin = std::min({min_eigenvalue(s.x.op()), min_eigenvalue(CMatrix(t.rho1.matrix() - m1.matrix())),
                                    min_eigenvalue(CMatrix(t.rho2.matrix() - m2.matrix()))});
    rep.levels.push_back(l);
    if (cfg.warm_start) warm = s.warm;
    top_untruncated = n == big1 && n == big2;
  }

  const auto solved = rep.solved();
  const double threshold = 1.0 - cfg.eps_decision;
  if (solved.empty()) return rep;
  const auto* top = solved.back();
  const int w = std::min<int>(5, static_cast<int>(solved.size()));
  rep.window = w;
  bool nondecreasing = true;
  for (std::size_t i = solved.size() - static_cast<std::size_t>(w) + 1; i < solved.size(); ++i)
    if (solved[i]->value < solved[i - 1]->value - 2.0 * cfg.gap_tol) nondecreasing = false;
  if (top->value > threshold && nondecreasing) {
    rep.verdict = LadderVerdict::CouplingExists;
  } else if (top_untruncated && top->upper < threshold) {
    rep.verdict = LadderVerdict::NoCoupling;
  }
  return rep;
}

struct ConsistencyReport {
  bool classical_feasible = false;
  bool quantum_verdict = false;
  bool agree = false;
  double mu = 0.0;
  double mu_upper = 0.0;
  ClassicalResult classical;
};

/// Diagonal embedding: rho_i = diag(mu_i), X = span{e_i (x) e_j : (i, j) in E}.
inline ConsistencyReport classical_quantum_consistency(const ClassicalInstance& inst, const SolverConfig& cfg = {}) {
  ConsistencyReport r;
  r.classical = classical_strassen(inst);
  r.classical_feasible = r.classical.feasible;
  if (inst.edges.empty()) {
    r.quantum_verdict = false;
  } else {
    const DensityOperator rho1(HermitianOperator::diagonal(inst.mu1));
    const DensityOperator rho2(HermitianOperator::diagonal(inst.mu2));
    std::vector<CVector> vecs;
    for (const auto& [i, j] : inst.edges) {
      CVector e = CVector::Zero(inst.m * inst.n);
      e(i * inst.n + j) = 1.0;
      vecs.push_back(e);
    }
    const Subspace x = subspace_from_vectors(inst.m * inst.n, vecs);
    const auto v = has_coupling(rho1, rho2, x, cfg);
    r.quantum_verdict = v.exists;
    r.mu = v.mu;
    r.mu_upper = v.mu_upper;
  }
  r.agree = r.quantum_verdict == r.classical_feasible;
  return r;
}

}  // namespace qstrassen
