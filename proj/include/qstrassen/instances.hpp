#pragma once

// Random instances with known answers. A coupled instance draws a random state
// supported in a random subspace and hands out its marginals, so a coupling
// exists by construction.

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "qstrassen/bipartite.hpp"
#include "qstrassen/flow.hpp"

namespace qstrassen {

using Rng = std::mt19937_64;

inline CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> nd;
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

/// W W^* / tr for a d x rank Ginibre W.
inline CMatrix random_state(Eigen::Index d, Eigen::Index rank, Rng& rng) {
  const CMatrix w = ginibre(d, rank, rng);
  CMatrix s = w * w.adjoint();
  s /= s.trace().real();
  return 0.5 * (s + s.adjoint());
}

/// n x k matrix with orthonormal columns, Haar-like.
inline CMatrix random_isometry(Eigen::Index n, Eigen::Index k, Rng& rng) {
  const CMatrix g = ginibre(n, k, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(n, k);
}

inline CMatrix random_hermitian(Eigen::Index n, Rng& rng) {
  const CMatrix g = ginibre(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

// Mirror the upper triangle so the matrix is Hermitian bit for bit; keeps
// serialized instances stable under load/save.
inline CMatrix exact_hermitian(CMatrix m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    m(j, j) = m(j, j).real();
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) m(i, j) = std::conj(m(j, i));
  }
  return m;
}

struct CoupledInstance {
  CMatrix rho;    ///< the planted coupling
  CMatrix rho1;
  CMatrix rho2;
  CMatrix basis;  ///< orthonormal basis of X (D x k)
};

/// Random full-rank state on a random k-dimensional X in C^{d1} (x) C^{d2}.
inline CoupledInstance coupled_instance(Eigen::Index d1, Eigen::Index d2, Eigen::Index k, Rng& rng) {
  CoupledInstance c;
  c.basis = random_isometry(d1 * d2, k, rng);
  const CMatrix g = random_state(k, k, rng);
  c.rho = c.basis * g * c.basis.adjoint();
  c.rho = 0.5 * (c.rho + c.rho.adjoint());
  c.rho1 = exact_hermitian(kernels::partial_trace_2(c.rho, d1, d2));
  c.rho2 = exact_hermitian(kernels::partial_trace_1(c.rho, d1, d2));
  return c;
}

/// (1 - s) rho + s sigma with sigma an independent full-rank state.
inline CMatrix mix_with_random_state(const CMatrix& rho, double s, Rng& rng) {
  const CMatrix sigma = random_state(rho.rows(), rho.rows(), rng);
  return (1.0 - s) * rho + s * sigma;
}

/// Orthonormal basis of C^n whose first k columns span the columns of `lead`.
inline CMatrix complete_basis(const CMatrix& lead, Rng& rng) {
  const Eigen::Index n = lead.rows();
  CMatrix m(n, n);
  m.leftCols(lead.cols()) = lead;
  m.rightCols(n - lead.cols()) = ginibre(n, n - lead.cols(), rng);
  Eigen::HouseholderQR<CMatrix> qr(m);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  return q;
}

/// Geometric spectrum lambda_i = (1 - r) r^i / (1 - r^D), i = 0..D-1.
inline std::vector<double> geometric_spectrum(Eigen::Index d, double ratio) {
  std::vector<double> l(static_cast<std::size_t>(d));
  double s = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) s += (l[static_cast<std::size_t>(i)] = std::pow(ratio, static_cast<double>(i)));
  for (auto& v : l) v /= s;
  return l;
}

/// Mixture of Schmidt-form vectors with geometric coefficients l_i:
///   psi_j = sum_i sqrt(l_i) e^{i theta_ij} e_i (x) e_i,   j < components,
///   phi   = sum_i sqrt(l_i) e_i (x) e_{pi(i)},
/// with pi a product of adjacent swaps among the leading `swap_span` indices
/// (at least one swap). X = span{psi_j, phi}. Truncation levels that split a
/// swapped pair have mu_n strictly below tr rho_{1,n}.
inline CoupledInstance geometric_instance(Eigen::Index d, double ratio, Eigen::Index components, Rng& rng,
                                          Eigen::Index swap_span = 6) {
  if (d < 2) throw DimensionError("geometric_instance: need d >= 2");
  if (components < 1 || components + 1 > d * d) throw DimensionError("geometric_instance: component count out of range");
  const auto lam = geometric_spectrum(d, ratio);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::bernoulli_distribution coin(0.5);
  const Eigen::Index k = components + 1;
  CMatrix raw = CMatrix::Zero(d * d, k);
  for (Eigen::Index j = 0; j < components; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      raw(i * d + i, j) = std::polar(std::sqrt(lam[static_cast<std::size_t>(i)]), j == 0 ? 0.0 : phase(rng));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  const Eigen::Index span = std::clamp<Eigen::Index>(swap_span, 2, d);
  bool swapped = false;
  for (Eigen::Index i = 0; i + 1 < span; i += 2)
    if (coin(rng)) {
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(i + 1)]);
      swapped = true;
    }
  if (!swapped) std::swap(perm[0], perm[1]);
  for (Eigen::Index i = 0; i < d; ++i)
    raw(i * d + perm[static_cast<std::size_t>(i)], components) = std::sqrt(lam[static_cast<std::size_t>(i)]);

  std::vector<double> w(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& v : w) total += (v = weight(rng));
  CoupledInstance c;
  c.rho = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < k; ++j) c.rho += (w[static_cast<std::size_t>(j)] / total) * raw.col(j) * raw.col(j).adjoint();
  c.rho = 0.5 * (c.rho + c.rho.adjoint());
  c.rho1 = exact_hermitian(kernels::partial_trace_2(c.rho, d, d));
  c.rho2 = exact_hermitian(kernels::partial_trace_1(c.rho, d, d));
  c.basis = orthonormalize_columns(raw);
  return c;
}

/// m x n instance with marginal entries k/12 and each edge present with
/// probability edge_prob.
inline ClassicalInstance random_classical_sized(int m, int n, Rng& rng, double edge_prob = 0.5) {
  ClassicalInstance inst;
  inst.m = m;
  inst.n = n;
  auto draw = [&](int len) {
    constexpr int den = 12;
    std::vector<int> counts(static_cast<std::size_t>(len), 0);
    std::uniform_int_distribution<int> pick(0, len - 1);
    for (int u = 0; u < den; ++u) ++counts[static_cast<std::size_t>(pick(rng))];
    std::vector<double> out;
    for (int c : counts) out.push_back(static_cast<double>(c) / den);
    return out;
  };
  inst.mu1 = draw(m);
  inst.mu2 = draw(n);
  std::bernoulli_distribution edge(edge_prob);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (edge(rng)) inst.edges.emplace_back(i, j);
  return inst;
}

inline ClassicalInstance random_classical(int max_m, int max_n, Rng& rng, double edge_prob = 0.5) {
  std::uniform_int_distribution<int> dm(1, max_m), dn(1, max_n);
  const int m = dm(rng);
  const int n = dn(rng);
  return random_classical_sized(m, n, rng, edge_prob);
}

}  // namespace qstrassen
