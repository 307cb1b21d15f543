#include <gtest/gtest.h>

#include <deque>

#include "qstrassen/instances.hpp"
#include "qstrassen/sdp/dense_operator.hpp"
#include "qstrassen/sdp/f_min.hpp"
#include "qstrassen/sdp/marginal_sdp.hpp"

namespace {

using namespace qstrassen;
using namespace qstrassen::sdp;

// Edmonds-Karp on a dense capacity matrix; source 0, sink n-1.
double oracle_max_flow(std::vector<std::vector<double>> cap) {
  const std::size_t n = cap.size();
  double total = 0.0;
  for (;;) {
    std::vector<int> prev(n, -1);
    prev[0] = 0;
    std::deque<std::size_t> q{0};
    while (!q.empty() && prev[n - 1] < 0) {
      const auto u = q.front();
      q.pop_front();
      for (std::size_t v = 0; v < n; ++v)
        if (prev[v] < 0 && cap[u][v] > 1e-15) {
          prev[v] = static_cast<int>(u);
          q.push_back(v);
        }
    }
    if (prev[n - 1] < 0) return total;
    double push = 1e300;
    for (std::size_t v = n - 1; v != 0; v = static_cast<std::size_t>(prev[v]))
      push = std::min(push, cap[static_cast<std::size_t>(prev[v])][v]);
    for (std::size_t v = n - 1; v != 0; v = static_cast<std::size_t>(prev[v])) {
      const auto u = static_cast<std::size_t>(prev[v]);
      cap[u][v] -= push;
      cap[v][u] += push;
    }
    total += push;
  }
}

MarginalSdpProblem problem(const CMatrix& rho1, const CMatrix& rho2, const CMatrix& basis) {
  return {rho1.rows(), rho2.rows(), HermitianOperator(CMatrix(basis * basis.adjoint())), HermitianOperator(rho1),
          HermitianOperator(rho2), true};
}

TEST(MarginalSdp, DiagonalInstancesEqualMaxFlow) {
  Rng rng(21);
  for (int t = 0; t < 15; ++t) {
    const auto inst = random_classical(3, 3, rng, 0.6);
    if (inst.edges.empty()) continue;
    const int m = inst.m, n = inst.n;
    std::vector<std::vector<double>> cap(static_cast<std::size_t>(m + n + 2),
                                         std::vector<double>(static_cast<std::size_t>(m + n + 2), 0.0));
    CMatrix basis = CMatrix::Zero(m * n, static_cast<Eigen::Index>(inst.edges.size()));
    for (std::size_t e = 0; e < inst.edges.size(); ++e) {
      const auto [i, j] = inst.edges[e];
      cap[static_cast<std::size_t>(1 + i)][static_cast<std::size_t>(1 + m + j)] = 10.0;
      basis(i * n + j, static_cast<Eigen::Index>(e)) = 1.0;
    }
    for (int i = 0; i < m; ++i) cap[0][static_cast<std::size_t>(1 + i)] = inst.mu1[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) cap[static_cast<std::size_t>(1 + m + j)].back() = inst.mu2[static_cast<std::size_t>(j)];
    const double flow = oracle_max_flow(cap);

    const auto p = problem(HermitianOperator::diagonal(inst.mu1).matrix(), HermitianOperator::diagonal(inst.mu2).matrix(),
                           basis);
    const auto s = solve_marginal_sdp(p);
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "trial " << t;
    EXPECT_NEAR(s.primal_value, flow, 1e-5) << "trial " << t;
    EXPECT_LE(s.primal_value, s.dual_value + 1e-12);
  }
}

TEST(MarginalSdp, OrthogonalSupportGivesZero) {
  // rho1 = rho2 = e0 e0^*, X = span{e1 (x) e1}: no overlap is possible.
  const CMatrix r = HermitianOperator::diagonal({1.0, 0.0}).matrix();
  CMatrix v = CMatrix::Zero(4, 1);
  v(3, 0) = 1.0;
  const auto s = solve_marginal_sdp(problem(r, r, v));
  EXPECT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_LE(s.dual_value, 1e-6);
  EXPECT_GE(s.primal_value, 0.0);
}

TEST(MarginalSdp, FullSpaceGivesOne) {
  Rng rng(22);
  const CMatrix r1 = random_state(3, 3, rng);
  const CMatrix r2 = random_state(2, 2, rng);
  const auto s = solve_marginal_sdp(problem(r1, r2, CMatrix::Identity(6, 6)));
  EXPECT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.primal_value, 1.0, 1e-6);
  EXPECT_NEAR(s.dual_value, 1.0, 1e-6);
}

TEST(MarginalSdp, CertificatesAreValid) {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    const auto c = coupled_instance(3, 3, 2, rng);
    const CMatrix r1 = mix_with_random_state(c.rho1, 0.3, rng);
    const auto p = problem(r1, c.rho2, c.basis);
    const auto s = solve_marginal_sdp(p);
    const auto cert = verify_duality_certificates(p, s);
    EXPECT_TRUE(cert.all_pass) << "trial " << t;
    EXPECT_TRUE(cert.trivial_feasible);
    EXPECT_NEAR(cert.trivial_value, 2.0, 1e-12);
    // Primal feasibility of the returned X, checked from scratch.
    const CMatrix x = s.x.matrix();
    EXPECT_GT(min_eigenvalue(x), -1e-9);
    EXPECT_GT(min_eigenvalue(CMatrix(r1 - kernels::partial_trace_2(x, 3, 3))), -1e-9);
    EXPECT_GT(min_eigenvalue(CMatrix(c.rho2 - kernels::partial_trace_1(x, 3, 3))), -1e-9);
    EXPECT_NEAR(s.primal_value, inner(p.objective.matrix(), x), 1e-9);
    // Weak duality, recomputed.
    const double dual = inner(r1, s.y1.matrix()) + inner(c.rho2, s.y2.matrix());
    EXPECT_GE(dual, s.primal_value - 1e-9);
    for (std::size_t i = 1; i < s.primal_history.size(); ++i) {
      EXPECT_GE(s.primal_history[i], s.primal_history[i - 1]);
      EXPECT_LE(s.dual_history[i], s.dual_history[i - 1]);
    }
  }
}

TEST(MarginalSdp, ScalesWithMarginals) {
  Rng rng(24);
  const auto c = coupled_instance(2, 3, 2, rng);
  const CMatrix r1 = mix_with_random_state(c.rho1, 0.4, rng);
  const auto base = solve_marginal_sdp(problem(r1, c.rho2, c.basis));
  auto p = problem(CMatrix(0.25 * r1), CMatrix(0.25 * c.rho2), c.basis);
  const auto scaled = solve_marginal_sdp(p);
  ASSERT_EQ(base.status, SolveStatus::Optimal);
  ASSERT_EQ(scaled.status, SolveStatus::Optimal);
  EXPECT_NEAR(scaled.primal_value, 0.25 * base.primal_value, 2e-6);
}

TEST(MarginalSdp, RejectsBadInput) {
  const CMatrix r = HermitianOperator::diagonal({0.5, 0.5}).matrix();
  auto p = problem(r, HermitianOperator::diagonal({0.5, 0.4}).matrix(), CMatrix::Identity(4, 4));
  EXPECT_THROW(solve_marginal_sdp(p), InvariantError);
  p.require_equal_traces = false;
  EXPECT_NO_THROW(solve_marginal_sdp(p));
  auto q = problem(r, HermitianOperator::diagonal({1.5, -0.5}).matrix(), CMatrix::Identity(4, 4));
  EXPECT_THROW(solve_marginal_sdp(q), InvariantError);
}

TEST(Repair, DominateRespectsMarginals) {
  Rng rng(25);
  for (int t = 0; t < 20; ++t) {
    const CMatrix r1 = random_state(3, 3, rng);
    const CMatrix r2 = random_state(4, 4, rng);
    const CMatrix x = 3.0 * random_state(12, 4, rng);
    const CMatrix y = dominate(x, Whitener(r1), Whitener(r2), 3, 4);
    EXPECT_GT(min_eigenvalue(y), -1e-12);
    EXPECT_GT(min_eigenvalue(CMatrix(r1 - kernels::partial_trace_2(y, 3, 4))), -1e-10);
    EXPECT_GT(min_eigenvalue(CMatrix(r2 - kernels::partial_trace_1(y, 3, 4))), -1e-10);
  }
}

TEST(Repair, GlueCompletesToExactMarginals) {
  Rng rng(26);
  const CMatrix r1 = random_state(3, 3, rng);
  const CMatrix r2 = random_state(2, 2, rng);
  const CMatrix gamma = dominate(random_state(6, 6, rng), Whitener(r1), Whitener(r2), 3, 2);
  const CMatrix s = glue(CMatrix(0.5 * gamma), r1, r2);
  EXPECT_GT(min_eigenvalue(s), -1e-12);
  EXPECT_LT((kernels::partial_trace_2(s, 3, 2) - r1).norm(), 1e-12);
  EXPECT_LT((kernels::partial_trace_1(s, 3, 2) - r2).norm(), 1e-12);
}

TEST(Repair, RestrictedCouplingFindsPlantedState) {
  Rng rng(27);
  for (int k : {2, 4, 6}) {
    const auto c = coupled_instance(3, 3, k, rng);
    const CMatrix x = restricted_coupling(c.basis, c.rho1, c.rho2);
    EXPECT_GT(min_eigenvalue(x), -1e-12);
    EXPECT_LT((kernels::partial_trace_2(x, 3, 3) - c.rho1).norm(), 1e-8) << "k=" << k;
    EXPECT_LT((kernels::partial_trace_1(x, 3, 3) - c.rho2).norm(), 1e-8) << "k=" << k;
    const CMatrix q = CMatrix::Identity(9, 9) - c.basis * c.basis.adjoint();
    EXPECT_LT((q * x).norm(), 1e-10);
  }
}

TEST(Admm, DenseOperatorFindsMinimumEigenvalue) {
  // min <C, X> s.t. tr X = 1, X >= 0 has value lambda_min(C).
  Rng rng(28);
  const CMatrix cm = random_hermitian(5, rng);
  const DenseOperator op({5}, {1}, [](const Blocks& x) { return Blocks{CMatrix::Constant(1, 1, x[0].trace())}; });
  const Blocks c{cm};
  const Blocks b{CMatrix::Constant(1, 1, 1.0)};
  SolverConfig cfg;
  cfg.max_iters = 20000;
  double best = 1e300;
  const double lmin = min_eigenvalue(cm);
  auto cert = [&](const Blocks& x, const Blocks&) {
    const double t = x[0].trace().real();
    if (t > 1e-12) best = std::min(best, inner(cm, x[0]) / t);
    return best - lmin < 1e-9;
  };
  const auto out = run_admm(op, c, b, cfg, cert);
  EXPECT_EQ(out.status, SolveStatus::Optimal);
  EXPECT_NEAR(best, lmin, 1e-8);
}

TEST(FMin, ConvexAndLipschitz) {
  Rng rng(29);
  const CMatrix r1 = random_state(2, 2, rng);
  const CMatrix r2 = random_state(3, 3, rng);
  for (int t = 0; t < 30; ++t) {
    const CMatrix x = random_state(6, 3, rng);
    const CMatrix y = 1.5 * random_state(6, 2, rng);
    const double fx = f_value(x, r1, r2), fy = f_value(y, r1, r2);
    EXPECT_LE(f_value(CMatrix(0.5 * (x + y)), r1, r2), 0.5 * (fx + fy) + 1e-12);
    EXPECT_LE(std::abs(fx - fy), 2.0 * trace_norm_hermitian(CMatrix(x - y)) + 1e-12);
  }
}

double golden_section(const std::function<double(double)>& g, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  for (int i = 0; i < 200; ++i) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    if (g(c) < g(d)) b = d;
    else a = c;
  }
  return g(0.5 * (a + b));
}

TEST(FMin, OneDimensionalSubspaceMatchesLineSearch) {
  // On X = span{v}, min_{G >= 0} f(G v v^*) is a convex problem in one scalar.
  Rng rng(30);
  for (int t = 0; t < 8; ++t) {
    const CMatrix r1 = random_state(2, 2, rng);
    const CMatrix r2 = random_state(3, 3, rng);
    const CVector v = ginibre(6, 1, rng).col(0).normalized();
    const CMatrix p = v * v.adjoint();
    const double oracle = golden_section([&](double s) { return f_value(CMatrix(s * p), r1, r2); }, 0.0, 4.0);
    const auto sol = solve_f_min(HermitianOperator(r1), HermitianOperator(r2), CMatrix(v));
    EXPECT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_NEAR(sol.value, oracle, 1e-6) << "trial " << t;
    EXPECT_LE(sol.lower_bound, oracle + 1e-9);
  }
}

TEST(FMin, OrthogonalSupportValueTwo) {
  const HermitianOperator r = HermitianOperator::diagonal({1.0, 0.0});
  CMatrix v = CMatrix::Zero(4, 1);
  v(3, 0) = 1.0;
  const auto sol = solve_f_min(r, r, v);
  EXPECT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.value, 2.0, 1e-6);
  EXPECT_NEAR(sol.lower_bound, 2.0, 1e-6);
}

TEST(FMin, PlantedCouplingReachesZero) {
  Rng rng(31);
  const auto c = coupled_instance(2, 2, 3, rng);
  const auto sol = solve_f_min(HermitianOperator(c.rho1), HermitianOperator(c.rho2), c.basis);
  EXPECT_LT(sol.value, 1e-5);
  EXPECT_GE(sol.lower_bound, 0.0);
}

}  // namespace
