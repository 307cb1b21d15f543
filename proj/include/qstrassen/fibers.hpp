#pragma once

// The fiber M(rho1, rho2) = {gamma >= 0 : tr_2 gamma = rho1, tr_1 gamma = rho2}:
// trace-norm distance to it, the glue repair onto it, and certified lower
// bounds on the semidistance between two fibers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qstrassen/bipartite.hpp"
#include "qstrassen/config.hpp"
#include "qstrassen/sdp/admm.hpp"
#include "qstrassen/sdp/dense_operator.hpp"
#include "qstrassen/sdp/repair.hpp"

namespace qstrassen {

class FiberSpec {
 public:
  FiberSpec(HermitianOperator rho1, HermitianOperator rho2) : rho1_(std::move(rho1)), rho2_(std::move(rho2)) {
    const double t1 = rho1_.trace();
    const double t2 = rho2_.trace();
    if (std::abs(t1 - t2) > 1e-9 * std::max(1.0, std::abs(t1)))
      throw InvariantError("Sigma membership", std::abs(t1 - t2), "empty fiber: tr rho1 != tr rho2");
    for (const auto* r : {&rho1_, &rho2_}) {
      const double lmin = min_eigenvalue(*r);
      if (lmin < -1e-9) throw InvariantError("marginal PSD", -lmin);
    }
  }

  const HermitianOperator& rho1() const noexcept { return rho1_; }
  const HermitianOperator& rho2() const noexcept { return rho2_; }
  Eigen::Index d1() const noexcept { return rho1_.dim(); }
  Eigen::Index d2() const noexcept { return rho2_.dim(); }
  double trace() const { return rho1_.trace(); }

  /// rho1 (x) rho2 / tr rho1 (zero for the zero pair).
  BipartiteOperator product_coupling() const {
    const double t = trace();
    if (t <= 0.0) return BipartiteOperator::zero(d1(), d2());
    return {d1(), d2(), CMatrix(kernels::kron(rho1_.matrix(), rho2_.matrix()) / t)};
  }

 private:
  HermitianOperator rho1_;
  HermitianOperator rho2_;
};

/// sigma = gamma + (rho1 - tr_2 gamma) (x) (rho2 - tr_1 gamma) / tr(rho1 - tr_2 gamma).
/// Requires both deficits PSD; returns gamma when the deficit trace is <= 1e-12.
inline BipartiteOperator glue_coupling(const BipartiteOperator& gamma, const FiberSpec& fiber, double psd_tol = 1e-9) {
  if (gamma.d1() != fiber.d1() || gamma.d2() != fiber.d2()) throw DimensionError("glue_coupling: dimension mismatch");
  const auto [m1, m2] = marginal_pair(gamma);
  const double l1 = min_eigenvalue(CMatrix(fiber.rho1().matrix() - m1.matrix()));
  const double l2 = min_eigenvalue(CMatrix(fiber.rho2().matrix() - m2.matrix()));
  if (std::min(l1, l2) < -psd_tol)
    throw InvariantError("marginal domination", -std::min(l1, l2), "glue_coupling needs tr_2 gamma <= rho1 and tr_1 gamma <= rho2");
  return {gamma.d1(), gamma.d2(), sdp::glue(gamma.matrix(), fiber.rho1().matrix(), fiber.rho2().matrix())};
}

namespace detail {

/// Projects a PSD operator into the fiber: dominate on the support, then glue.
class FiberRepair {
 public:
  explicit FiberRepair(const FiberSpec& f)
      : d1_(f.d1()), d2_(f.d2()), u1_(sdp::support_basis(f.rho1().matrix())), u2_(sdp::support_basis(f.rho2().matrix())) {
    full_ = u1_.cols() == d1_ && u2_.cols() == d2_;
    r1_ = full_ ? f.rho1().matrix() : CMatrix(u1_.adjoint() * f.rho1().matrix() * u1_);
    r2_ = full_ ? f.rho2().matrix() : CMatrix(u2_.adjoint() * f.rho2().matrix() * u2_);
    empty_ = u1_.cols() == 0 || u2_.cols() == 0;
    if (!empty_) {
      w1_.emplace(r1_);
      w2_.emplace(r2_);
    }
  }

  CMatrix operator()(const CMatrix& gamma) const {
    if (empty_) return CMatrix::Zero(d1_ * d2_, d1_ * d2_);
    const CMatrix g = full_ ? gamma : kernels::compress(gamma, u1_, u2_);
    CMatrix dom = sdp::dominate(g, *w1_, *w2_, r1_.rows(), r2_.rows());
    CMatrix sigma = sdp::glue(dom, r1_, r2_);
    return full_ ? sigma : kernels::expand(sigma, u1_, u2_);
  }

 private:
  Eigen::Index d1_, d2_;
  CMatrix u1_, u2_, r1_, r2_;
  bool full_ = true;
  bool empty_ = false;
  std::optional<sdp::Whitener> w1_, w2_;
};

inline CMatrix clip_unit(const CMatrix& w) {
  const auto e = hermitian_eig_matrix(w);
  return spectral_apply(e, [](double v) { return std::clamp(v, -1.0, 1.0); });
}

}  // namespace detail

struct FiberDistance {
  double distance = 0.0;     ///< ||beta - nearest||_1, certified upper bound
  double lower_bound = 0.0;  ///< certified lower bound
  double gap = 0.0;
  BipartiteOperator nearest;  ///< exact fiber member (up to roundoff)
  int iterations = 0;
  sdp::SolveStatus status = sdp::SolveStatus::MaxIters;
};

/// min ||beta - gamma||_1 over the fiber. Blocks (gamma, P, N) with
/// tr_2 gamma = rho1, tr_1 gamma = rho2, gamma + P - N = beta, cost tr P + tr N.
inline FiberDistance dist_to_fiber(const BipartiteOperator& beta, const FiberSpec& fiber, const SolverConfig& cfg = {}) {
  const Eigen::Index d1 = fiber.d1();
  const Eigen::Index d2 = fiber.d2();
  const Eigen::Index n = d1 * d2;
  if (beta.d1() != d1 || beta.d2() != d2) throw DimensionError("dist_to_fiber: dimension mismatch");
  const CMatrix& rho1 = fiber.rho1().matrix();
  const CMatrix& rho2 = fiber.rho2().matrix();

  const sdp::DenseOperator op({n, n, n}, {d1, d2, n}, [&](const sdp::Blocks& x) {
    return sdp::Blocks{kernels::partial_trace_2(x[0], d1, d2), kernels::partial_trace_1(x[0], d1, d2),
                       x[0] + x[1] - x[2]};
  });
  const sdp::Blocks c{CMatrix::Zero(n, n), CMatrix::Identity(n, n), CMatrix::Identity(n, n)};
  const sdp::Blocks b{rho1, rho2, beta.matrix()};
  const detail::FiberRepair repair(fiber);

  CMatrix best_sigma = fiber.product_coupling().matrix();
  double best_ub = trace_norm_hermitian(CMatrix(beta.matrix() - best_sigma));
  // Partial traces contract the trace norm, so each marginal mismatch of
  // beta is a lower bound.
  const auto [bm1, bm2] = marginal_pair(beta);
  double best_lb = std::max(trace_norm_hermitian(CMatrix(bm1.matrix() - rho1)),
                            trace_norm_hermitian(CMatrix(bm2.matrix() - rho2)));
  auto certify = [&](const sdp::Blocks& x, const sdp::Blocks& y) {
    const CMatrix sigma = repair(x[0]);
    const double ub = trace_norm_hermitian(CMatrix(beta.matrix() - sigma));
    if (ub < best_ub) {
      best_ub = ub;
      best_sigma = sigma;
    }
    // Dual: max <W, beta> - <Y1, rho1> - <Y2, rho2>, ||W||_inf <= 1,
    // Y1 (x) I + I (x) Y2 >= W. Multipliers give W = y3, Y = -(y1, y2).
    const CMatrix w = detail::clip_unit(y[2]);
    CMatrix y1 = -y[0];
    const CMatrix y2 = -y[1];
    const double delta = std::max(0.0, -min_eigenvalue(CMatrix(kernels::adjoint_marginal(y1, y2) - w)));
    y1.diagonal().array() += delta;
    const double lb = qstrassen::inner(w, beta.matrix()) - qstrassen::inner(y1, rho1) - qstrassen::inner(y2, rho2);
    best_lb = std::max(best_lb, lb);
    return best_ub - best_lb <= cfg.gap_tol;
  };
  const auto out = sdp::run_admm(op, c, b, cfg, certify);

  FiberDistance r;
  r.distance = best_ub;
  r.lower_bound = std::min(best_lb, best_ub);
  r.gap = best_ub - r.lower_bound;
  r.nearest = BipartiteOperator(d1, d2, best_sigma);
  r.iterations = out.iterations;
  r.status = out.status;
  if (r.status == sdp::SolveStatus::Optimal && r.gap > cfg.gap_tol) r.status = sdp::SolveStatus::MaxIters;
  return r;
}

struct FiberMaximizer {
  BipartiteOperator member;  ///< exact fiber member
  double value = 0.0;        ///< <C, member>
  double upper_bound = 0.0;  ///< certified bound on max over the fiber
  sdp::SolveStatus status = sdp::SolveStatus::MaxIters;
};

/// max <C, gamma> over the fiber; its maximizers lean toward extreme points.
inline FiberMaximizer maximize_over_fiber(const CMatrix& objective, const FiberSpec& fiber, const SolverConfig& cfg = {}) {
  const Eigen::Index d1 = fiber.d1();
  const Eigen::Index d2 = fiber.d2();
  const Eigen::Index n = d1 * d2;
  const CMatrix& rho1 = fiber.rho1().matrix();
  const CMatrix& rho2 = fiber.rho2().matrix();
  const sdp::DenseOperator op({n}, {d1, d2}, [&](const sdp::Blocks& x) {
    return sdp::Blocks{kernels::partial_trace_2(x[0], d1, d2), kernels::partial_trace_1(x[0], d1, d2)};
  });
  const sdp::Blocks c{CMatrix(-objective)};
  const sdp::Blocks b{rho1, rho2};
  const detail::FiberRepair repair(fiber);

  CMatrix best = fiber.product_coupling().matrix();
  double best_val = qstrassen::inner(objective, best);
  double best_ub = std::numeric_limits<double>::infinity();
  auto certify = [&](const sdp::Blocks& x, const sdp::Blocks& y) {
    const CMatrix sigma = repair(x[0]);
    const double v = qstrassen::inner(objective, sigma);
    if (v > best_val) {
      best_val = v;
      best = sigma;
    }
    CMatrix y1 = -y[0];
    const CMatrix y2 = -y[1];
    const double delta = std::max(0.0, -min_eigenvalue(CMatrix(kernels::adjoint_marginal(y1, y2) - objective)));
    y1.diagonal().array() += delta;
    best_ub = std::min(best_ub, qstrassen::inner(y1, rho1) + qstrassen::inner(y2, rho2));
    return best_ub - best_val <= cfg.gap_tol;
  };
  const auto out = sdp::run_admm(op, c, b, cfg, certify);
  FiberMaximizer r{BipartiteOperator(d1, d2, best), best_val, best_ub, out.status};
  return r;
}

struct SemidistanceReport {
  double lower_bound = 0.0;     ///< max over samples of certified dist(beta, fiberB)
  double marginal_floor = 0.0;  ///< (||sigma1 - rho1||_1 + ||sigma2 - rho2||_1) / 2
  std::vector<double> sample_distances;
  BipartiteOperator witness;    ///< member of fiberA attaining lower_bound
};

/// Certified lower bound on sup_{beta in A} dist(beta, B): every sample is a
/// genuine member of A and contributes the certified lower bound of its
/// distance. Sample k depends only on (seed, k), so more samples never lower
/// the bound.
inline SemidistanceReport semidistance_lower_bound(const FiberSpec& a, const FiberSpec& b, int samples,
                                                   const SolverConfig& cfg = {}, std::uint64_t seed = 0) {
  if (a.d1() != b.d1() || a.d2() != b.d2()) throw DimensionError("semidistance_lower_bound: dimension mismatch");
  if (samples < 0) throw DimensionError("semidistance_lower_bound: samples must be nonnegative");
  SemidistanceReport r;
  r.marginal_floor = 0.5 * (trace_norm_hermitian(CMatrix(a.rho1().matrix() - b.rho1().matrix())) +
                            trace_norm_hermitian(CMatrix(a.rho2().matrix() - b.rho2().matrix())));
  r.witness = a.product_coupling();
  const Eigen::Index n = a.d1() * a.d2();
  for (int k = 0; k < samples; ++k) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> nd;
    CMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = Complex(nd(rng), nd(rng));
    const CMatrix objective = 0.5 * (g + g.adjoint());
    const auto member = maximize_over_fiber(objective, a, cfg).member;
    const auto d = dist_to_fiber(member, b, cfg);
    r.sample_distances.push_back(d.lower_bound);
    if (d.lower_bound > r.lower_bound) {
      r.lower_bound = d.lower_bound;
      r.witness = member;
    }
  }
  return r;
}

}  // namespace qstrassen
