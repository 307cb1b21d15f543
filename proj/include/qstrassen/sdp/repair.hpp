#pragma once

// Turning approximate solver iterates into exactly feasible points.
//
// dominate():  X >= 0  ->  X' >= 0 with tr_2 X' <= rho1, tr_1 X' <= rho2.
// glue():      a dominated X' -> an exact coupling of (rho1, rho2).
// Both assume rho1, rho2 positive definite, i.e. supports already restricted.

#include <algorithm>
#include <cmath>
#include <vector>

#include "qstrassen/bipartite.hpp"

namespace qstrassen::sdp {

/// Orthonormal basis of the range of a PSD matrix: eigenvectors with
/// eigenvalue above rel_tol * lambda_max.
inline CMatrix support_basis(const CMatrix& rho, double rel_tol = 1e-10) {
  const auto e = hermitian_eig_matrix(rho);
  const double top = std::max(0.0, e.values(0));
  Eigen::Index r = 0;
  while (r < e.values.size() && e.values(r) > rel_tol * top && e.values(r) > 0.0) ++r;
  return e.vectors.leftCols(r);
}

/// Square root and inverse square root of a positive definite matrix.
struct Whitener {
  CMatrix half;
  CMatrix inv_half;

  explicit Whitener(const CMatrix& rho) {
    const auto e = hermitian_eig_matrix(rho);
    const double floor = 1e-300;
    half = spectral_apply(e, [floor](double v) { return std::sqrt(std::max(v, floor)); });
    inv_half = spectral_apply(e, [floor](double v) { return 1.0 / std::sqrt(std::max(v, floor)); });
  }

  /// Largest eigenvalue of rho^{-1/2} D rho^{-1/2}; <= 1 iff D <= rho.
  double ratio(const CMatrix& d) const {
    CMatrix m = inv_half * d * inv_half;
    return max_eigenvalue(CMatrix(0.5 * (m + m.adjoint())));
  }

  /// K with K D K^* <= rho, K = I on directions where D already fits.
  CMatrix shrink_factor(const CMatrix& d) const {
    CMatrix m = inv_half * d * inv_half;
    m = 0.5 * (m + m.adjoint());
    const auto e = hermitian_eig_matrix(m);
    if (e.values(0) <= 1.0) return CMatrix::Identity(d.rows(), d.rows());
    const CMatrix g = spectral_apply(e, [](double v) { return v > 1.0 ? 1.0 / std::sqrt(v) : 1.0; });
    return half * g * inv_half;
  }
};

/// Congruences (K1 x I), (I x K2) pull the marginals under (rho1, rho2);
/// a final uniform scale absorbs what the alternation leaves behind.
inline CMatrix dominate(const CMatrix& x, const Whitener& w1, const Whitener& w2, Eigen::Index d1, Eigen::Index d2,
                        int rounds = 3) {
  CMatrix cur = x;
  for (int r = 0; r < rounds; ++r) {
    const CMatrix k1 = w1.shrink_factor(kernels::partial_trace_2(cur, d1, d2));
    if (!k1.isIdentity(0.0)) cur = kernels::left_factor_congruence(k1, cur, d2);
    const CMatrix k2 = w2.shrink_factor(kernels::partial_trace_1(cur, d1, d2));
    if (!k2.isIdentity(0.0)) cur = kernels::right_factor_congruence(k2, cur, d1);
  }
  const double r1 = w1.ratio(kernels::partial_trace_2(cur, d1, d2));
  const double r2 = w2.ratio(kernels::partial_trace_1(cur, d1, d2));
  const double worst = std::max(r1, r2);
  if (worst > 1.0) cur /= worst;
  return cur;
}

/// gamma + (rho1 - tr_2 gamma) (x) (rho2 - tr_1 gamma) / tr(rho1 - tr_2 gamma),
/// or gamma itself when the deficit trace is below `zero_tol`.
inline CMatrix glue(const CMatrix& gamma, const CMatrix& rho1, const CMatrix& rho2, double zero_tol = 1e-12) {
  const Eigen::Index d1 = rho1.rows();
  const Eigen::Index d2 = rho2.rows();
  const CMatrix def1 = rho1 - kernels::partial_trace_2(gamma, d1, d2);
  const CMatrix def2 = rho2 - kernels::partial_trace_1(gamma, d1, d2);
  const double t = def1.trace().real();
  if (t <= zero_tol) return gamma;
  CMatrix out = gamma + kernels::kron(def1, def2) / t;
  return 0.5 * (out + out.adjoint());
}

/// Looks for X = V G V^*, G >= 0, with tr_2 X = rho1 and tr_1 X = rho2 by
/// alternating projections between the PSD cone and the affine solution set
/// (minimum-norm least squares when the equations are inconsistent), all in
/// the k x k coordinates of G. Returns V G V^* with G PSD; exact when a
/// coupling supported in range V exists and the iteration converges.
inline CMatrix restricted_coupling(const CMatrix& v, const CMatrix& rho1, const CMatrix& rho2, int iters = 500,
                                   double tol = 1e-14) {
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index d1 = rho1.rows();
  const Eigen::Index d2 = rho2.rows();
  const Eigen::Index k = v.cols();
  std::vector<CMatrix> m(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const CVector col = v.col(j);
    m[static_cast<std::size_t>(j)] = Eigen::Map<const RowMajor>(col.data(), d1, d2);
  }
  // Marginals of v_p v_q^*.
  auto marg = [&](Eigen::Index p, Eigen::Index q) {
    const CMatrix& a = m[static_cast<std::size_t>(p)];
    const CMatrix& b = m[static_cast<std::size_t>(q)];
    return std::pair<CMatrix, CMatrix>{a * b.adjoint(), a.transpose() * b.conjugate()};
  };
  const Eigen::Index rows = 2 * (d1 * d1 + d2 * d2);
  auto flatten = [&](const CMatrix& t1, const CMatrix& t2) {
    RVector out(rows);
    Eigen::Index r = 0;
    for (const CMatrix* t : {&t1, &t2})
      for (Eigen::Index j = 0; j < t->cols(); ++j)
        for (Eigen::Index i = 0; i < t->rows(); ++i) {
          out(r++) = (*t)(i, j).real();
          out(r++) = (*t)(i, j).imag();
        }
    return out;
  };
  // Orthonormal Hermitian basis: E_pp, (E_pq + E_qp)/sqrt2, i(E_pq - E_qp)/sqrt2.
  const double h = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd sys(rows, k * k);
  Eigen::Index c = 0;
  for (Eigen::Index p = 0; p < k; ++p) {
    const auto [a1, a2] = marg(p, p);
    sys.col(c++) = flatten(a1, a2);
    for (Eigen::Index q = p + 1; q < k; ++q) {
      const auto [b1, b2] = marg(p, q);
      const auto [c1, c2] = marg(q, p);
      sys.col(c++) = h * flatten(CMatrix(b1 + c1), CMatrix(b2 + c2));
      sys.col(c++) = h * flatten(CMatrix(Complex(0, 1) * (b1 - c1)), CMatrix(Complex(0, 1) * (b2 - c2)));
    }
  }
  auto to_matrix = [&](const RVector& coef) {
    CMatrix g(k, k);
    Eigen::Index i = 0;
    for (Eigen::Index p = 0; p < k; ++p) {
      g(p, p) = coef(i++);
      for (Eigen::Index q = p + 1; q < k; ++q) {
        g(p, q) = h * Complex(coef(i), coef(i + 1));
        g(q, p) = std::conj(g(p, q));
        i += 2;
      }
    }
    return g;
  };
  auto to_coef = [&](const CMatrix& g) {
    RVector coef(k * k);
    Eigen::Index i = 0;
    for (Eigen::Index p = 0; p < k; ++p) {
      coef(i++) = g(p, p).real();
      for (Eigen::Index q = p + 1; q < k; ++q) {
        coef(i++) = g(p, q).real() / h;
        coef(i++) = g(p, q).imag() / h;
      }
    }
    return coef;
  };

  const auto cod = sys.completeOrthogonalDecomposition();
  const RVector target = flatten(rho1, rho2);
  RVector coef = cod.solve(target);
  CMatrix g = jordan_split(to_matrix(coef)).first;
  for (int it = 0; it < iters; ++it) {
    RVector cur = to_coef(g);
    const RVector res = sys * cur - target;
    if (res.norm() <= tol) break;
    cur -= cod.solve(res);
    g = jordan_split(to_matrix(cur)).first;
  }
  CMatrix x = v * g * v.adjoint();
  return 0.5 * (x + x.adjoint());
}

}  // namespace qstrassen::sdp
