#pragma once

// Dense complex kernels: Hermitian eigendecomposition, SVD, PSD projection,
// Schatten norms and the singular-value inequality checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "qstrassen/config.hpp"
#include "qstrassen/errors.hpp"

#ifdef QSTRASSEN_USE_LAPACK
extern "C" void zheevd_(const char* jobz, const char* uplo, const int* n, std::complex<double>* a, const int* lda,
                        double* w, std::complex<double>* work, const int* lwork, double* rwork, const int* lrwork,
                        int* iwork, const int* liwork, int* info);
#endif

namespace qstrassen {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace detail {

inline void guard_magnitude(const CMatrix& m, double guard) {
  if (m.size() == 0) return;
  const double peak = m.cwiseAbs().maxCoeff();
  if (!std::isfinite(peak) || peak > guard) {
    throw InvariantError("magnitude guard", peak, "matrix entries must be finite and below the guard");
  }
}

inline double max_asymmetry(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Dense Hermitian matrix. Construction always symmetrizes, so the stored
/// entries satisfy H(i,j) == conj(H(j,i)) exactly.
class HermitianOperator {
 public:
  HermitianOperator() : m_(CMatrix::Zero(1, 1)) {}

  explicit HermitianOperator(const CMatrix& m) : m_(symmetrize(m)) {}

  /// Rejects input whose asymmetry exceeds `tol` instead of silently fixing it.
  static HermitianOperator checked(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw DimensionError("Hermitian operator must be square");
    const double asym = detail::max_asymmetry(m);
    if (asym > tol) throw InvariantError("Hermitian symmetry", asym);
    return HermitianOperator(m);
  }

  static HermitianOperator identity(Eigen::Index d) { return HermitianOperator(CMatrix::Identity(d, d)); }
  static HermitianOperator zero(Eigen::Index d) { return HermitianOperator(CMatrix::Zero(d, d)); }

  static HermitianOperator diagonal(const std::vector<double>& diag) {
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
    return HermitianOperator(m);
  }

  /// v v^* for a column vector v.
  static HermitianOperator outer(const CVector& v) { return HermitianOperator(v * v.adjoint()); }

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.diagonal().real().sum(); }

  HermitianOperator operator+(const HermitianOperator& o) const { return HermitianOperator(m_ + o.m_); }
  HermitianOperator operator-(const HermitianOperator& o) const { return HermitianOperator(m_ - o.m_); }
  HermitianOperator operator-() const { return HermitianOperator(-m_); }
  HermitianOperator operator*(double s) const { return HermitianOperator(m_ * s); }
  friend HermitianOperator operator*(double s, const HermitianOperator& h) { return h * s; }

 private:
  static CMatrix symmetrize(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("Hermitian operator must be square");
    if (m.rows() < 1) throw DimensionError("Hermitian operator must have dimension >= 1");
    CMatrix s = 0.5 * (m + m.adjoint());
    s.diagonal() = s.diagonal().real().cast<Complex>();
    return s;
  }

  CMatrix m_;
};

/// Real inner product <A, B> = Re tr(A^* B).
inline double inner(const CMatrix& a, const CMatrix& b) {
  return (a.array().conjugate() * b.array()).real().sum();
}
inline double inner(const HermitianOperator& a, const HermitianOperator& b) { return inner(a.matrix(), b.matrix()); }

struct EigenDecomposition {
  RVector values;   ///< nonincreasing
  CMatrix vectors;  ///< orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Eigendecomposition of a matrix assumed Hermitian (only the lower triangle
/// is read). Eigenvalues are returned in nonincreasing order.
inline EigenDecomposition hermitian_eig_matrix(const CMatrix& h) {
  EigenDecomposition out;
#ifdef QSTRASSEN_USE_LAPACK
  // Divide and conquer; noticeably faster than the QR iteration beyond n ~ 100.
  if (h.rows() >= 48) {
    const int n = static_cast<int>(h.rows());
    CMatrix a = h;
    RVector w(n);
    int info = 0;
    int lwork = -1, lrwork = -1, liwork = -1;
    Complex wq;
    double rq = 0.0;
    int iq = 0;
    zheevd_("V", "L", &n, a.data(), &n, w.data(), &wq, &lwork, &rq, &lrwork, &iq, &liwork, &info);
    lwork = static_cast<int>(wq.real());
    lrwork = static_cast<int>(rq);
    liwork = iq;
    std::vector<Complex> work(static_cast<std::size_t>(lwork));
    std::vector<double> rwork(static_cast<std::size_t>(lrwork));
    std::vector<int> iwork(static_cast<std::size_t>(liwork));
    zheevd_("V", "L", &n, a.data(), &n, w.data(), work.data(), &lwork, rwork.data(), &lrwork, iwork.data(), &liwork,
            &info);
    if (info != 0) throw ConvergenceError("Hermitian eigensolver did not converge", detail::max_asymmetry(h));
    out.values = w.reverse();
    out.vectors = a.rowwise().reverse();
    return out;
  }
#endif
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigensolver did not converge", detail::max_asymmetry(h));
  }
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

inline EigenDecomposition hermitian_eig(const HermitianOperator& h) { return hermitian_eig_matrix(h.matrix()); }

inline double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver did not converge", 0.0);
  return es.eigenvalues()(0);
}
inline double max_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver did not converge", 0.0);
  return es.eigenvalues()(h.rows() - 1);
}
inline double min_eigenvalue(const HermitianOperator& h) { return min_eigenvalue(h.matrix()); }
inline double max_eigenvalue(const HermitianOperator& h) { return max_eigenvalue(h.matrix()); }

/// V f(diag) V^* for a real function applied to eigenvalues.
template <class F>
CMatrix spectral_apply(const EigenDecomposition& e, F&& f) {
  RVector mapped = e.values.unaryExpr(std::forward<F>(f));
  return e.vectors * mapped.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

/// Splits a Hermitian matrix into its positive and negative parts
/// H = pos - neg with pos, neg PSD and pos * neg = 0.
inline std::pair<CMatrix, CMatrix> jordan_split(const CMatrix& h) {
  const auto e = hermitian_eig_matrix(h);
  const Eigen::Index n = e.values.size();
  Eigen::Index npos = 0;
  while (npos < n && e.values(npos) > 0.0) ++npos;
  // Form the lower-rank part explicitly and recover the other by subtraction.
  CMatrix pos(n, n);
  CMatrix neg(n, n);
  if (npos <= n - npos) {
    const auto vp = e.vectors.leftCols(npos);
    pos.noalias() = vp * e.values.head(npos).cast<Complex>().asDiagonal() * vp.adjoint();
    neg = pos - h;
  } else {
    const auto vn = e.vectors.rightCols(n - npos);
    neg.noalias() = vn * (-e.values.tail(n - npos)).cast<Complex>().asDiagonal() * vn.adjoint();
    pos = h + neg;
  }
  pos = 0.5 * (pos + pos.adjoint()).eval();
  neg = 0.5 * (neg + neg.adjoint()).eval();
  return {pos, neg};
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
inline HermitianOperator psd_project(const HermitianOperator& h) {
  return HermitianOperator(jordan_split(h.matrix()).first);
}

enum class SchattenOrder { One, Two, Inf };

struct SingularSpectrum {
  RVector values;  ///< nonincreasing, nonnegative
  CMatrix left;    ///< g_i as columns
  CMatrix right;   ///< f_i as columns, A = sum sigma_i g_i f_i^*
};

inline SingularSpectrum singular_values(const CMatrix& a, const ToleranceConfig& tol = {}) {
  if (a.size() == 0) throw DimensionError("singular_values of an empty matrix");
  detail::guard_magnitude(a, tol.magnitude_guard);
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("SVD did not converge", 0.0);
  SingularSpectrum s;
  s.values = svd.singularValues().cwiseMax(0.0);
  s.left = svd.matrixU();
  s.right = svd.matrixV();
  return s;
}

inline double schatten_norm(const CMatrix& a, SchattenOrder p, const ToleranceConfig& tol = {}) {
  detail::guard_magnitude(a, tol.magnitude_guard);
  if (a.size() == 0) return 0.0;
  if (p == SchattenOrder::Two) return a.norm();
  const RVector s = singular_values(a, tol).values;
  return p == SchattenOrder::One ? s.sum() : s(0);
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
inline double trace_norm_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver did not converge", 0.0);
  return es.eigenvalues().cwiseAbs().sum();
}
inline double trace_norm(const HermitianOperator& h) { return trace_norm_hermitian(h.matrix()); }

inline double operator_norm(const CMatrix& a) { return schatten_norm(a, SchattenOrder::Inf); }

/// Maximum deviation of the Gram matrix of the columns from the identity.
inline double orthonormality_defect(const CMatrix& cols) {
  if (cols.cols() == 0) return 0.0;
  const CMatrix gram = cols.adjoint() * cols;
  return (gram - CMatrix::Identity(cols.cols(), cols.cols())).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Singular value inequality checks

struct SvProductBoundReport {
  RVector left_margins;   ///< sigma_i(L)*||A|| - sigma_i(A L)
  RVector right_margins;  ///< sigma_i(L)*||A|| - sigma_i(L A)
  double min_margin = 0.0;
  bool holds = true;
};

/// sigma_i(AL), sigma_i(LA) <= sigma_i(L) ||A||, evaluated for every index
/// where the product is defined.
inline SvProductBoundReport check_sv_product_bound(const CMatrix& a, const CMatrix& l, double slack = 1e-9) {
  const bool left_ok = a.cols() == l.rows();
  const bool right_ok = l.cols() == a.rows();
  if (!left_ok && !right_ok) throw DimensionError("check_sv_product_bound: A and L are not conformable");
  const double norm_a = operator_norm(a);
  const RVector sl = singular_values(l).values;
  auto margins = [&](const CMatrix& prod) {
    const RVector sp = singular_values(prod).values;
    RVector m(sp.size());
    for (Eigen::Index i = 0; i < sp.size(); ++i) {
      const double bound = i < sl.size() ? sl(i) * norm_a : 0.0;
      m(i) = bound - sp(i);
    }
    return m;
  };
  SvProductBoundReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  if (left_ok) {
    r.left_margins = margins(a * l);
    r.min_margin = std::min(r.min_margin, r.left_margins.minCoeff());
  }
  if (right_ok) {
    r.right_margins = margins(l * a);
    r.min_margin = std::min(r.min_margin, r.right_margins.minCoeff());
  }
  r.holds = r.min_margin >= -slack;
  return r;
}

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  ///< rhs - lhs
  bool holds = true;
};

/// sum_i |<L x_i, y_i>| <= sum_{i<=n} sigma_i(L) for orthonormal frames x, y
/// given as the columns of `x` and `y`.
inline BoundReport check_trace_inequality(const CMatrix& l, const CMatrix& x, const CMatrix& y,
                                          double orthonormal_tol = 1e-10, double slack = 1e-9) {
  if (x.cols() != y.cols()) throw DimensionError("trace inequality: frames have different cardinality");
  if (x.rows() != l.cols() || y.rows() != l.rows()) throw DimensionError("trace inequality: frame length mismatch");
  if (x.cols() > std::min(l.rows(), l.cols())) throw DimensionError("trace inequality: too many frame vectors");
  const double dx = orthonormality_defect(x);
  const double dy = orthonormality_defect(y);
  if (dx > orthonormal_tol) throw InvariantError("orthonormal frame x", dx);
  if (dy > orthonormal_tol) throw InvariantError("orthonormal frame y", dy);
  BoundReport r;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    // <L x_i, y_i> = y_i^* L x_i
    r.lhs += std::abs(y.col(i).dot(l * x.col(i)));
  }
  const RVector s = singular_values(l).values;
  r.rhs = s.head(x.cols()).sum();
  r.margin = r.rhs - r.lhs;
  r.holds = r.margin >= -slack;
  return r;
}

struct HsProductBoundReport {
  BoundReport norm_bound;       ///< ||LM||_1 <= ||L||_2 ||M||_2
  double trace_identity_error;  ///< |tr(LM) - <L, M^*>|
  bool holds = true;
};

inline HsProductBoundReport check_hs_product_bound(const CMatrix& l, const CMatrix& m, double slack = 1e-9) {
  if (l.cols() != m.rows()) throw DimensionError("check_hs_product_bound: L and M are not conformable");
  HsProductBoundReport r;
  const CMatrix lm = l * m;
  r.norm_bound.lhs = schatten_norm(lm, SchattenOrder::One);
  r.norm_bound.rhs = l.norm() * m.norm();
  r.norm_bound.margin = r.norm_bound.rhs - r.norm_bound.lhs;
  r.norm_bound.holds = r.norm_bound.margin >= -slack;
  // <A, B> = sum a_ij conj(b_ij); here B = M^*.
  const CMatrix m_adj = m.adjoint();
  Complex hs(0.0, 0.0);
  if (l.rows() == m_adj.rows() && l.cols() == m_adj.cols()) {
    hs = (l.array() * m_adj.array().conjugate()).sum();
  }
  const Complex tr = lm.rows() == lm.cols() ? lm.trace() : Complex(std::numeric_limits<double>::quiet_NaN(), 0);
  r.trace_identity_error = std::abs(tr - hs);
  r.holds = r.norm_bound.holds && r.trace_identity_error <= slack * std::max(1.0, r.norm_bound.rhs);
  return r;
}

}  // namespace qstrassen
