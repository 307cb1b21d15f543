#pragma once

// Dual ADMM for   minimize <c, x>  s.t.  A(x) = b,  x in a product of PSD cones.
//
// Iteration (penalty mu, dual slack z):
//   y = (A A^*)^{-1} [ mu (b - A x) - A(z - c) ]
//   V = c - A^* y - mu x
//   z = P_+(V),  x = P_+(-V) / mu
// One eigendecomposition per block per iteration. The penalty is rebalanced
// from the ratio of primal and dual residuals every `balance_every` iterations.
//
// The iterates are never trusted directly: a caller-supplied certifier turns
// (x, y) into a feasible primal point and a feasible dual point every
// `check_every` iterations and decides when the certified gap is small enough.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>

#include "qstrassen/config.hpp"
#include "qstrassen/sdp/blocks.hpp"

namespace qstrassen::sdp {

template <class Op>
concept ConicOperator = requires(const Op& op, const Blocks& v) {
  { op.apply(v) } -> std::convertible_to<Blocks>;
  { op.adjoint(v) } -> std::convertible_to<Blocks>;
  { op.solve_normal(v) } -> std::convertible_to<Blocks>;
  { op.primal_dims() } -> std::convertible_to<std::vector<Eigen::Index>>;
  { op.constraint_dims() } -> std::convertible_to<std::vector<Eigen::Index>>;
};

/// Solver state that can seed a later solve of a same-shaped problem.
struct AdmmState {
  Blocks x;
  Blocks y;
  Blocks z;
  double penalty = 1.0;
};

enum class SolveStatus { Optimal, MaxIters, InfeasibleNumerics };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::InfeasibleNumerics: return "infeasible_numerics";
  }
  return "unknown";
}

struct AdmmOutcome {
  AdmmState state;
  int iterations = 0;
  double primal_residual = 0.0;  ///< ||A x - b|| / (1 + ||b||)
  double dual_residual = 0.0;    ///< ||A^* y + z - c|| / (1 + ||c||)
  SolveStatus status = SolveStatus::MaxIters;
};

/// `certify(x, y)` returns true once the caller's certified gap is closed.
template <ConicOperator Op, class Certifier>
AdmmOutcome run_admm(const Op& op, const Blocks& c, const Blocks& b, const SolverConfig& cfg, Certifier&& certify,
                     const AdmmState* warm = nullptr) {
  AdmmOutcome out;
  AdmmState& s = out.state;
  const auto pdims = op.primal_dims();
  const auto cdims = op.constraint_dims();
  if (warm != nullptr && dims_of(warm->x) == pdims && dims_of(warm->y) == cdims && dims_of(warm->z) == pdims) {
    s = *warm;
    if (!(s.penalty > 0.0) || !std::isfinite(s.penalty)) s.penalty = cfg.penalty_init;
  } else {
    s.x = zeros_like(pdims);
    s.y = zeros_like(cdims);
    s.z = zeros_like(pdims);
    s.penalty = cfg.penalty_init;
  }
  const double bnorm = 1.0 + norm(b);
  const double cnorm = 1.0 + norm(c);
  const int every = std::max(1, cfg.check_every);
  const int balance_every = std::max(every, cfg.balance_every);
  const double alpha = std::clamp(cfg.relaxation, 0.05, 1.95);

  if (certify(s.x, s.y)) {
    out.status = SolveStatus::Optimal;
    return out;
  }

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double mu = s.penalty;
    Blocks ax = op.apply(s.x);
    Blocks zc = axpy(s.z, -1.0, c);
    Blocks rhs = op.apply(zc);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = mu * (b[i] - ax[i]) - rhs[i];
    s.y = op.solve_normal(rhs);
    const Blocks aty = op.adjoint(s.y);

    for (std::size_t j = 0; j < pdims.size(); ++j) {
      // Relaxed step: A^* y replaced by alpha A^* y + (1 - alpha)(c - z).
      CMatrix v = alpha == 1.0 ? CMatrix(c[j] - aty[j] - mu * s.x[j])
                               : CMatrix(alpha * (c[j] - aty[j]) + (1.0 - alpha) * s.z[j] - mu * s.x[j]);
      auto [pos, neg] = jordan_split(v);
      s.z[j] = std::move(pos);
      s.x[j] = neg / mu;
    }
    out.iterations = it;

    if (!all_finite(s.x) || !all_finite(s.y)) {
      out.status = SolveStatus::InfeasibleNumerics;
      return out;
    }

    if (it % every == 0 || it == cfg.max_iters) {
      ax = op.apply(s.x);
      double pr = 0.0;
      for (std::size_t i = 0; i < ax.size(); ++i) pr += (ax[i] - b[i]).squaredNorm();
      double dr = 0.0;
      for (std::size_t j = 0; j < pdims.size(); ++j) dr += (aty[j] + s.z[j] - c[j]).squaredNorm();
      out.primal_residual = std::sqrt(pr) / bnorm;
      out.dual_residual = std::sqrt(dr) / cnorm;

      if (certify(s.x, s.y)) {
        out.status = SolveStatus::Optimal;
        return out;
      }
      // Frequent penalty changes keep ADMM from settling, so rebalance rarely.
      if (it % balance_every == 0) {
        if (out.dual_residual > cfg.balance_ratio * out.primal_residual) {
          s.penalty /= cfg.balance_factor;
        } else if (out.primal_residual > cfg.balance_ratio * out.dual_residual) {
          s.penalty *= cfg.balance_factor;
        }
        s.penalty = std::clamp(s.penalty, 1e-6, 1e6);
      }
    }
  }
  out.status = SolveStatus::MaxIters;
  return out;
}

}  // namespace qstrassen::sdp
