#pragma once

// A point of a product of Hermitian matrix spaces. A scalar variable is a
// 1x1 block.

#include <cmath>
#include <vector>

#include "qstrassen/linalg.hpp"

namespace qstrassen::sdp {

using Blocks = std::vector<CMatrix>;
using qstrassen::inner;

inline Blocks zeros_like(const std::vector<Eigen::Index>& dims) {
  Blocks out;
  out.reserve(dims.size());
  for (auto d : dims) out.push_back(CMatrix::Zero(d, d));
  return out;
}

inline std::vector<Eigen::Index> dims_of(const Blocks& b) {
  std::vector<Eigen::Index> d;
  d.reserve(b.size());
  for (const auto& m : b) d.push_back(m.rows());
  return d;
}

inline double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += qstrassen::inner(a[i], b[i]);
  return s;
}

inline double norm(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

/// a + alpha * b
inline Blocks axpy(const Blocks& a, double alpha, const Blocks& b) {
  Blocks out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * b[i];
  return out;
}

inline bool all_finite(const Blocks& a) {
  for (const auto& m : a)
    if (!m.allFinite()) return false;
  return true;
}

/// Number of real coordinates of an n x n Hermitian matrix.
inline Eigen::Index herm_dim(Eigen::Index n) { return n * n; }

/// Isometric real coordinates: diagonal, then sqrt(2) Re and sqrt(2) Im of
/// the strict upper triangle, row by row.
inline void vectorize_into(const CMatrix& h, double* out) {
  const Eigen::Index n = h.rows();
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) out[k++] = h(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out[k++] = M_SQRT2 * h(i, j).real();
      out[k++] = M_SQRT2 * h(i, j).imag();
    }
  }
}

inline CMatrix devectorize(const double* v, Eigen::Index n) {
  CMatrix h(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = v[k++];
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex z(v[k] * M_SQRT1_2, v[k + 1] * M_SQRT1_2);
      k += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

inline RVector vectorize(const Blocks& b) {
  Eigen::Index total = 0;
  for (const auto& m : b) total += herm_dim(m.rows());
  RVector v(total);
  Eigen::Index off = 0;
  for (const auto& m : b) {
    vectorize_into(m, v.data() + off);
    off += herm_dim(m.rows());
  }
  return v;
}

inline Blocks devectorize(const RVector& v, const std::vector<Eigen::Index>& dims) {
  Blocks out;
  out.reserve(dims.size());
  Eigen::Index off = 0;
  for (auto d : dims) {
    out.push_back(devectorize(v.data() + off, d));
    off += herm_dim(d);
  }
  return out;
}

}  // namespace qstrassen::sdp
