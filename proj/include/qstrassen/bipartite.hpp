#pragma once

// Tensor-product bookkeeping on C^{d1} (x) C^{d2}. Composite index convention:
// (i, p) -> i * d2 + p, i.e. the first factor is the major index.

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "qstrassen/linalg.hpp"

namespace qstrassen {

/// Hermitian operator on C^{d1} (x) C^{d2} with its factor dimensions.
class BipartiteOperator {
 public:
  BipartiteOperator() : d1_(1), d2_(1) {}

  BipartiteOperator(Eigen::Index d1, Eigen::Index d2, HermitianOperator op)
      : d1_(d1), d2_(d2), op_(std::move(op)) {
    if (d1 < 1 || d2 < 1) throw DimensionError("factor dimensions must be positive");
    if (op_.dim() != d1 * d2) throw DimensionError("bipartite operator dimension must equal d1*d2");
  }

  BipartiteOperator(Eigen::Index d1, Eigen::Index d2, const CMatrix& m)
      : BipartiteOperator(d1, d2, HermitianOperator(m)) {}

  static BipartiteOperator zero(Eigen::Index d1, Eigen::Index d2) {
    return {d1, d2, HermitianOperator::zero(d1 * d2)};
  }

  Eigen::Index d1() const noexcept { return d1_; }
  Eigen::Index d2() const noexcept { return d2_; }
  Eigen::Index dim() const noexcept { return d1_ * d2_; }
  const HermitianOperator& op() const noexcept { return op_; }
  const CMatrix& matrix() const noexcept { return op_.matrix(); }
  double trace() const { return op_.trace(); }

 private:
  Eigen::Index d1_;
  Eigen::Index d2_;
  HermitianOperator op_;
};

/// PSD operator with a prescribed trace (1 for states).
class DensityOperator {
 public:
  explicit DensityOperator(HermitianOperator op, double trace_target = 1.0, double tol = 1e-9)
      : op_(std::move(op)), trace_target_(trace_target) {
    const double lmin = min_eigenvalue(op_);
    if (lmin < -tol) throw InvariantError("density operator PSD", -lmin);
    const double terr = std::abs(op_.trace() - trace_target);
    if (terr > tol) throw InvariantError("density operator trace", terr);
  }

  const HermitianOperator& op() const noexcept { return op_; }
  const CMatrix& matrix() const noexcept { return op_.matrix(); }
  Eigen::Index dim() const noexcept { return op_.dim(); }
  double trace_target() const noexcept { return trace_target_; }

 private:
  HermitianOperator op_;
  double trace_target_;
};

// ---------------------------------------------------------------------------
// Raw kernels on CMatrix; the typed wrappers below delegate here.

namespace kernels {

/// [tr_2 F]_{ij} = sum_p F_{(i,p),(j,p)}
inline CMatrix partial_trace_2(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d1; ++j) {
      out(i, j) = f.block(i * d2, j * d2, d2, d2).trace();
    }
  }
  return out;
}

/// [tr_1 F]_{pq} = sum_i F_{(i,p),(i,q)}
inline CMatrix partial_trace_1(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d2, d2);
  for (Eigen::Index i = 0; i < d1; ++i) out += f.block(i * d2, i * d2, d2, d2);
  return out;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Y1 (x) I + I (x) Y2
inline CMatrix adjoint_marginal(const CMatrix& y1, const CMatrix& y2) {
  const Eigen::Index d1 = y1.rows();
  const Eigen::Index d2 = y2.rows();
  CMatrix out = CMatrix::Zero(d1 * d2, d1 * d2);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d1; ++j) {
      if (y1(i, j) != Complex(0.0, 0.0)) out.block(i * d2, j * d2, d2, d2).diagonal().array() += y1(i, j);
    }
    out.block(i * d2, i * d2, d2, d2) += y2;
  }
  return out;
}

/// (K (x) I) X for K acting on the first factor.
inline CMatrix left_factor_times(const CMatrix& k, const CMatrix& x, Eigen::Index d2) {
  const Eigen::Index d1_out = k.rows();
  const Eigen::Index d1_in = k.cols();
  CMatrix out = CMatrix::Zero(d1_out * d2, x.cols());
  for (Eigen::Index i = 0; i < d1_out; ++i) {
    for (Eigen::Index j = 0; j < d1_in; ++j) {
      if (k(i, j) != Complex(0.0, 0.0)) out.middleRows(i * d2, d2).noalias() += k(i, j) * x.middleRows(j * d2, d2);
    }
  }
  return out;
}

/// (I (x) K) X for K acting on the second factor.
inline CMatrix right_factor_times(const CMatrix& k, const CMatrix& x, Eigen::Index d1) {
  const Eigen::Index d2_in = k.cols();
  const Eigen::Index d2_out = k.rows();
  CMatrix out(d1 * d2_out, x.cols());
  for (Eigen::Index i = 0; i < d1; ++i) out.middleRows(i * d2_out, d2_out).noalias() = k * x.middleRows(i * d2_in, d2_in);
  return out;
}

/// (K (x) I) X (K (x) I)^*
inline CMatrix left_factor_congruence(const CMatrix& k, const CMatrix& x, Eigen::Index d2) {
  const CMatrix t = left_factor_times(k, x, d2);
  CMatrix out = left_factor_times(k, t.adjoint(), d2).adjoint();
  return 0.5 * (out + out.adjoint());
}

/// (I (x) K) X (I (x) K)^*
inline CMatrix right_factor_congruence(const CMatrix& k, const CMatrix& x, Eigen::Index d1) {
  const CMatrix t = right_factor_times(k, x, d1);
  CMatrix out = right_factor_times(k, t.adjoint(), d1).adjoint();
  return 0.5 * (out + out.adjoint());
}

/// (U1 (x) U2)^* X (U1 (x) U2) for isometries U1, U2 (columns orthonormal).
inline CMatrix compress(const CMatrix& x, const CMatrix& u1, const CMatrix& u2) {
  const Eigen::Index d1 = u1.rows();
  const CMatrix t = right_factor_congruence(u2.adjoint(), x, d1);
  return left_factor_congruence(u1.adjoint(), t, u2.cols());
}

/// (U1 (x) U2) X (U1 (x) U2)^*
inline CMatrix expand(const CMatrix& x, const CMatrix& u1, const CMatrix& u2) {
  const Eigen::Index r1 = u1.cols();
  const CMatrix t = right_factor_congruence(u2, x, r1);
  return left_factor_congruence(u1, t, u2.rows());
}

}  // namespace kernels

// ---------------------------------------------------------------------------

inline HermitianOperator partial_trace_2(const BipartiteOperator& f) {
  return HermitianOperator(kernels::partial_trace_2(f.matrix(), f.d1(), f.d2()));
}

inline HermitianOperator partial_trace_1(const BipartiteOperator& f) {
  return HermitianOperator(kernels::partial_trace_1(f.matrix(), f.d1(), f.d2()));
}

/// (tr_2 F, tr_1 F)
inline std::pair<HermitianOperator, HermitianOperator> marginal_pair(const BipartiteOperator& f) {
  return {partial_trace_2(f), partial_trace_1(f)};
}

inline BipartiteOperator adjoint_marginal(const HermitianOperator& y1, const HermitianOperator& y2) {
  return {y1.dim(), y2.dim(), kernels::adjoint_marginal(y1.matrix(), y2.matrix())};
}

inline BipartiteOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return {a.dim(), b.dim(), kernels::kron(a.matrix(), b.matrix())};
}

/// Orthonormal basis of a subspace of C^n with its cached projector.
class Subspace {
 public:
  Subspace(Eigen::Index ambient_dim, CMatrix basis) : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
    if (basis_.rows() != ambient_dim_) throw DimensionError("subspace basis length must equal the ambient dimension");
    if (basis_.cols() < 1) throw InvariantError("nonempty subspace", 0.0);
    projector_ = HermitianOperator(basis_ * basis_.adjoint());
  }

  Eigen::Index ambient_dim() const noexcept { return ambient_dim_; }
  Eigen::Index dim() const noexcept { return basis_.cols(); }
  const CMatrix& basis() const noexcept { return basis_; }
  const HermitianOperator& projector() const noexcept { return projector_; }

  /// Span of the first n basis vectors.
  Subspace leading(Eigen::Index n) const {
    if (n < 1 || n > dim()) throw DimensionError("leading: n out of range");
    return {ambient_dim_, basis_.leftCols(n)};
  }

 private:
  Eigen::Index ambient_dim_;
  CMatrix basis_;
  HermitianOperator projector_;
};

/// Two-pass modified Gram-Schmidt over the columns of `raw`. Columns whose
/// residual norm (relative to their input norm) falls below `drop_tol` are
/// discarded. Returns the orthonormal columns, possibly with zero columns.
inline CMatrix orthonormalize_columns(const CMatrix& raw, double drop_tol = 1e-10) {
  std::vector<CVector> kept;
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double n0 = raw.col(c).norm();
    if (!(n0 > 0.0)) continue;
    CVector v = raw.col(c) / n0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : kept) v -= q * q.dot(v);
    }
    const double r = v.norm();
    if (r < drop_tol) continue;
    kept.push_back(v / r);
  }
  CMatrix out(raw.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = kept[i];
  return out;
}

inline Subspace subspace_from_vectors(Eigen::Index ambient_dim, const std::vector<CVector>& vectors,
                                      double drop_tol = 1e-10) {
  CMatrix raw(ambient_dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient_dim) throw DimensionError("subspace vector length must equal the ambient dimension");
    raw.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  CMatrix basis = orthonormalize_columns(raw, drop_tol);
  if (basis.cols() == 0) throw InvariantError("nonempty subspace", 0.0, "all spanning vectors are degenerate");
  return {ambient_dim, std::move(basis)};
}

inline Subspace subspace_from_columns(const CMatrix& raw, double drop_tol = 1e-10) {
  CMatrix basis = orthonormalize_columns(raw, drop_tol);
  if (basis.cols() == 0) throw InvariantError("nonempty subspace", 0.0, "all spanning vectors are degenerate");
  return {raw.rows(), std::move(basis)};
}

/// Diagonal projector onto the first n entries of C^d.
inline CMatrix leading_projector(Eigen::Index n, Eigen::Index d) {
  CMatrix p = CMatrix::Zero(d, d);
  p.topLeftCorner(n, n).setIdentity();
  return p;
}

/// P_{n1} (x) P_{n2}: projector onto span{e_i (x) e_j : i < n1, j < n2}.
inline BipartiteOperator truncation_projector(Eigen::Index n1, Eigen::Index n2, Eigen::Index d1, Eigen::Index d2) {
  if (n1 < 1 || n1 > d1 || n2 < 1 || n2 > d2) throw DimensionError("truncation_projector: n out of range");
  return {d1, d2, kernels::kron(leading_projector(n1, d1), leading_projector(n2, d2))};
}

/// Rows of a bipartite vector (or matrix) that survive truncation to the
/// leading n1 x n2 block, in the composite order of C^{n1} (x) C^{n2}.
inline std::vector<Eigen::Index> truncation_indices(Eigen::Index n1, Eigen::Index n2, Eigen::Index d2) {
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(n1 * n2));
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index p = 0; p < n2; ++p) idx.push_back(i * d2 + p);
  return idx;
}

struct CompressedSubspace {
  CMatrix embedding;  ///< d1 x d1' isometry onto H1'
  Subspace reduced;   ///< the subspace expressed in C^{d1'} (x) C^{d2}
};

/// Finds H1' = span{u_{l,p}} with x_l = sum_p u_{l,p} (x) e_p, so that the
/// subspace lies in H1' (x) C^{d2} and dim H1' <= dim(X) * d2.
inline CompressedSubspace compress_subspace_h2_finite(const Subspace& x, Eigen::Index d1, Eigen::Index d2) {
  if (x.ambient_dim() != d1 * d2) throw DimensionError("compress_subspace_h2_finite: ambient dimension mismatch");
  CMatrix u(d1, x.dim() * d2);
  for (Eigen::Index l = 0; l < x.dim(); ++l) {
    for (Eigen::Index p = 0; p < d2; ++p) {
      CVector col(d1);
      for (Eigen::Index i = 0; i < d1; ++i) col(i) = x.basis()(i * d2 + p, l);
      u.col(l * d2 + p) = col;
    }
  }
  // Absolute drop threshold: the u_{l,p} are slices of unit vectors.
  CMatrix w;
  {
    std::vector<CVector> kept;
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      CVector v = u.col(c);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : kept) v -= q * q.dot(v);
      const double r = v.norm();
      if (r < 1e-10) continue;
      kept.push_back(v / r);
    }
    w.resize(d1, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) w.col(static_cast<Eigen::Index>(i)) = kept[i];
  }
  const Eigen::Index r = w.cols();
  CMatrix reduced = kernels::left_factor_times(w.adjoint(), x.basis(), d2);
  return {w, Subspace(r * d2, reduced)};
}

struct WeakVsTraceReport {
  int n = 0;
  Eigen::Index d1 = 0;
  double pairing = 0.0;         ///< max |<rho_n x, y>| over the fixed witness set
  double trace2_pairing = 0.0;  ///< max |<tr_2 rho_n u, v>| over witnesses in H1
  double trace1_pairing = 0.0;  ///< <tr_1 rho_n e_1, e_1>
  double trace1_gap = 0.0;      ///< ||tr_1 rho_n - tr_1 0||_1
};

/// rho_n = (e_n (x) e_1)(e_n (x) e_1)^* on C^{d1} (x) C^2. Its pairings with
/// vectors supported on the first three coordinates of the first factor vanish
/// once n > 3, while tr_1 rho_n = e_1 e_1^* stays at trace-norm distance 1
/// from tr_1 of the weak limit 0.
inline WeakVsTraceReport weak_vs_trace_demo(int n) {
  if (n < 1) throw DimensionError("weak_vs_trace_demo: n must be >= 1");
  constexpr Eigen::Index d2 = 2;
  constexpr Eigen::Index witness_rows = 3;
  const Eigen::Index d1 = std::max<Eigen::Index>(n + 1, witness_rows);
  CVector v = CVector::Zero(d1 * d2);
  v((n - 1) * d2 + 0) = 1.0;
  const BipartiteOperator rho(d1, d2, HermitianOperator::outer(v));

  std::vector<CVector> witnesses;
  CVector uniform = CVector::Zero(d1 * d2);
  for (Eigen::Index a = 0; a < witness_rows; ++a) {
    for (Eigen::Index b = 0; b < d2; ++b) {
      CVector e = CVector::Zero(d1 * d2);
      e(a * d2 + b) = 1.0;
      witnesses.push_back(e);
      uniform(a * d2 + b) = 1.0;
    }
  }
  witnesses.push_back(uniform.normalized());

  WeakVsTraceReport r;
  r.n = n;
  r.d1 = d1;
  for (const auto& x : witnesses)
    for (const auto& y : witnesses) r.pairing = std::max(r.pairing, std::abs(y.dot(rho.matrix() * x)));

  const CMatrix t2 = kernels::partial_trace_2(rho.matrix(), d1, d2);
  for (Eigen::Index a = 0; a < witness_rows; ++a)
    for (Eigen::Index b = 0; b < witness_rows; ++b) r.trace2_pairing = std::max(r.trace2_pairing, std::abs(t2(a, b)));

  const CMatrix t1 = kernels::partial_trace_1(rho.matrix(), d1, d2);
  r.trace1_pairing = t1(0, 0).real();
  r.trace1_gap = trace_norm_hermitian(t1);
  return r;
}

}  // namespace qstrassen
