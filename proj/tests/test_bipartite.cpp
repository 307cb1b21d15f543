#include <gtest/gtest.h>

#include "qstrassen/bipartite.hpp"
#include "qstrassen/instances.hpp"

namespace {

using namespace qstrassen;

// Index-sum oracles written directly from the definition, entry by entry.
CMatrix oracle_tr2(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i)
    for (Eigen::Index j = 0; j < d1; ++j)
      for (Eigen::Index p = 0; p < d2; ++p) out(i, j) += f(i * d2 + p, j * d2 + p);
  return out;
}

CMatrix oracle_tr1(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d2, d2);
  for (Eigen::Index p = 0; p < d2; ++p)
    for (Eigen::Index q = 0; q < d2; ++q)
      for (Eigen::Index i = 0; i < d1; ++i) out(p, q) += f(i * d2 + p, i * d2 + q);
  return out;
}

CMatrix oracle_kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index p = 0; p < b.rows(); ++p)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index q = 0; q < b.cols(); ++q) out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return out;
}

TEST(PartialTrace, GoldenTwoByTwo) {
  // F(r, c) = 10 r + c on C^2 (x) C^2, composite index (i, p) -> 2 i + p.
  CMatrix f(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) f(r, c) = 10.0 * r + c;
  CMatrix tr2(2, 2), tr1(2, 2);
  tr2 << 11, 15, 51, 55;
  tr1 << 22, 24, 42, 44;
  EXPECT_EQ(kernels::partial_trace_2(f, 2, 2), tr2);
  EXPECT_EQ(kernels::partial_trace_1(f, 2, 2), tr1);
}

TEST(PartialTrace, MatchesIndexSumOracle) {
  Rng rng(11);
  for (int d1 = 1; d1 <= 6; ++d1)
    for (int d2 = 1; d2 <= 6; ++d2) {
      const CMatrix f = ginibre(d1 * d2, d1 * d2, rng);
      EXPECT_LT((kernels::partial_trace_2(f, d1, d2) - oracle_tr2(f, d1, d2)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((kernels::partial_trace_1(f, d1, d2) - oracle_tr1(f, d1, d2)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(PartialTrace, ProductStatesAndLinearity) {
  Rng rng(12);
  const CMatrix a = random_state(3, 3, rng);
  const CMatrix b = random_state(4, 2, rng);
  const CMatrix ab = kernels::kron(a, b);
  EXPECT_LT((ab - oracle_kron(a, b)).norm(), 1e-14);
  EXPECT_LT((kernels::partial_trace_2(ab, 3, 4) - a).norm(), 1e-12);
  EXPECT_LT((kernels::partial_trace_1(ab, 3, 4) - b).norm(), 1e-12);

  const CMatrix f = ginibre(12, 12, rng);
  const CMatrix g = ginibre(12, 12, rng);
  const Complex s(0.3, -1.7);
  EXPECT_LT((kernels::partial_trace_2(f + s * g, 3, 4) -
             (kernels::partial_trace_2(f, 3, 4) + s * kernels::partial_trace_2(g, 3, 4)))
                .norm(),
            1e-12);
}

TEST(PartialTrace, AdjointIdentity) {
  // <tr_2 F, Y1> + <tr_1 F, Y2> = <F, Y1 (x) I + I (x) Y2>
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const CMatrix f = random_hermitian(15, rng);
    const CMatrix y1 = random_hermitian(3, rng);
    const CMatrix y2 = random_hermitian(5, rng);
    const double lhs = inner(kernels::partial_trace_2(f, 3, 5), y1) + inner(kernels::partial_trace_1(f, 3, 5), y2);
    const CMatrix adj = oracle_kron(y1, CMatrix::Identity(5, 5)) + oracle_kron(CMatrix::Identity(3, 3), y2);
    EXPECT_LT((kernels::adjoint_marginal(y1, y2) - adj).norm(), 1e-12);
    EXPECT_NEAR(lhs, inner(f, adj), 1e-10);
  }
}

TEST(PartialTrace, TraceNormContractionAndPositivity) {
  Rng rng(14);
  for (int t = 0; t < 30; ++t) {
    const CMatrix f = t % 2 ? random_hermitian(12, rng) : random_state(12, 5, rng);
    const CMatrix a = kernels::partial_trace_2(f, 4, 3);
    const CMatrix b = kernels::partial_trace_1(f, 4, 3);
    EXPECT_NEAR(a.trace().real(), f.trace().real(), 1e-10);
    EXPECT_NEAR(b.trace().real(), f.trace().real(), 1e-10);
    EXPECT_LE(trace_norm_hermitian(a), trace_norm_hermitian(f) + 1e-9);
    EXPECT_LE(trace_norm_hermitian(b), trace_norm_hermitian(f) + 1e-9);
    if (t % 2 == 0) {
      EXPECT_GT(min_eigenvalue(a), -1e-12);
      EXPECT_GT(min_eigenvalue(b), -1e-12);
    }
  }
}

TEST(FactorMaps, MatchExplicitKronecker) {
  Rng rng(15);
  const CMatrix x = ginibre(12, 12, rng);
  const CMatrix k1 = ginibre(2, 3, rng);
  const CMatrix k2 = ginibre(5, 4, rng);
  EXPECT_LT((kernels::left_factor_times(k1, x, 4) - oracle_kron(k1, CMatrix::Identity(4, 4)) * x).norm(), 1e-11);
  EXPECT_LT((kernels::right_factor_times(k2, x, 3) - oracle_kron(CMatrix::Identity(3, 3), k2) * x).norm(), 1e-11);

  const CMatrix h = random_hermitian(12, rng);
  const CMatrix u1 = random_isometry(3, 2, rng);
  const CMatrix u2 = random_isometry(4, 3, rng);
  const CMatrix u = oracle_kron(u1, u2);
  EXPECT_LT((kernels::compress(h, u1, u2) - u.adjoint() * h * u).norm(), 1e-11);
  const CMatrix small = random_hermitian(6, rng);
  EXPECT_LT((kernels::expand(small, u1, u2) - u * small * u.adjoint()).norm(), 1e-11);
}

TEST(BipartiteOperator, ValidatesDimensions) {
  EXPECT_THROW(BipartiteOperator(2, 3, CMatrix::Identity(5, 5)), DimensionError);
  EXPECT_THROW(BipartiteOperator(0, 3, CMatrix::Identity(3, 3)), DimensionError);
  const auto t = tensor(HermitianOperator::identity(2), HermitianOperator::diagonal({1.0, 2.0, 3.0}));
  EXPECT_EQ(t.d1(), 2);
  EXPECT_EQ(t.d2(), 3);
  EXPECT_NEAR(t.trace(), 12.0, 1e-14);
  const auto [m1, m2] = marginal_pair(t);
  EXPECT_NEAR(m1(0, 0).real(), 6.0, 1e-14);
  EXPECT_NEAR(m2(2, 2).real(), 6.0, 1e-14);
}

TEST(DensityOperator, RejectsNonStates) {
  EXPECT_THROW(DensityOperator(HermitianOperator::diagonal({1.5, -0.5})), InvariantError);
  EXPECT_THROW(DensityOperator(HermitianOperator::diagonal({0.5, 0.6})), InvariantError);
  try {
    DensityOperator(HermitianOperator::diagonal({1.5, -0.5}));
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.invariant(), "density operator PSD");
    EXPECT_NEAR(e.magnitude(), 0.5, 1e-14);
  }
  EXPECT_NO_THROW(DensityOperator(HermitianOperator::diagonal({0.25, 0.75})));
  EXPECT_NO_THROW(DensityOperator(HermitianOperator::diagonal({1.0, 2.0}), 3.0));
}

TEST(Subspace, OrthonormalizationAndProjector) {
  Rng rng(16);
  CMatrix raw = ginibre(6, 3, rng);
  raw.col(2) = raw.col(0) * Complex(2.0, 1.0) - raw.col(1);  // dependent
  const Subspace s = subspace_from_columns(raw);
  EXPECT_EQ(s.dim(), 2);
  EXPECT_LT(orthonormality_defect(s.basis()), 1e-12);
  const CMatrix& p = s.projector().matrix();
  EXPECT_LT((p * p - p).norm(), 1e-12);
  EXPECT_NEAR(p.trace().real(), 2.0, 1e-12);
  EXPECT_LT(((CMatrix::Identity(6, 6) - p) * raw).norm(), 1e-10);
  EXPECT_EQ(s.leading(1).dim(), 1);
  EXPECT_THROW(s.leading(3), DimensionError);
  EXPECT_THROW(subspace_from_columns(CMatrix::Zero(4, 2)), InvariantError);
  EXPECT_THROW(subspace_from_vectors(4, {CVector::Ones(3)}), DimensionError);
}

TEST(Subspace, TruncationHelpers) {
  const auto p = truncation_projector(2, 1, 3, 2);
  EXPECT_NEAR(p.trace(), 2.0, 1e-14);
  const auto idx = truncation_indices(2, 1, 2);
  ASSERT_EQ(idx.size(), 2u);
  EXPECT_EQ(idx[0], 0);
  EXPECT_EQ(idx[1], 2);
  for (auto i : idx) EXPECT_EQ(p.matrix()(i, i), Complex(1.0));
}

TEST(CompressSubspace, ReducedSubspaceEmbedsBack) {
  Rng rng(17);
  // X = span of vectors living in span{e_0, e_3} (x) C^2 inside C^5 (x) C^2.
  CMatrix raw = CMatrix::Zero(10, 2);
  const CMatrix coef = ginibre(4, 2, rng);
  for (int c = 0; c < 2; ++c) {
    raw(0 * 2 + 0, c) = coef(0, c);
    raw(0 * 2 + 1, c) = coef(1, c);
    raw(3 * 2 + 0, c) = coef(2, c);
    raw(3 * 2 + 1, c) = coef(3, c);
  }
  const Subspace x = subspace_from_columns(raw);
  const auto cs = compress_subspace_h2_finite(x, 5, 2);
  EXPECT_LE(cs.embedding.cols(), 2);
  EXPECT_LE(cs.embedding.cols(), x.dim() * 2);
  EXPECT_LT(orthonormality_defect(cs.embedding), 1e-12);
  const CMatrix back = kernels::left_factor_times(cs.embedding, cs.reduced.basis(), 2);
  EXPECT_LT((back - x.basis()).norm(), 1e-10);
}

TEST(WeakVsTrace, PairingsVanishWhileMarginalStays) {
  for (int n = 4; n <= 12; ++n) {
    const auto r = weak_vs_trace_demo(n);
    EXPECT_EQ(r.pairing, 0.0);
    EXPECT_EQ(r.trace2_pairing, 0.0);
    EXPECT_EQ(r.trace1_gap, 1.0);
    EXPECT_EQ(r.trace1_pairing, 1.0);
  }
  // For small n the witnesses still see the state.
  EXPECT_GT(weak_vs_trace_demo(1).pairing, 0.0);
}

}  // namespace
