#pragma once

// Randomized property suites run by `qstrassen selftest`: partial-trace index
// sums, trace/norm/positivity behaviour of partial traces, and the singular
// value inequalities.

#include <algorithm>
#include <string>
#include <vector>

#include "cli/generators.hpp"

namespace qstrassen::cli {

struct SuiteResult {
  std::string name;
  int trials = 0;
  int violations = 0;
  double worst_margin = 0.0;  ///< smallest observed margin (negative = violation size)
  bool passed() const { return trials > 0 && violations == 0; }
};

namespace selftest_detail {

inline CMatrix naive_ptrace2(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i)
    for (Eigen::Index j = 0; j < d1; ++j)
      for (Eigen::Index p = 0; p < d2; ++p) out(i, j) += f(i * d2 + p, j * d2 + p);
  return out;
}

inline CMatrix naive_ptrace1(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d2, d2);
  for (Eigen::Index p = 0; p < d2; ++p)
    for (Eigen::Index q = 0; q < d2; ++q)
      for (Eigen::Index i = 0; i < d1; ++i) out(p, q) += f(i * d2 + p, i * d2 + q);
  return out;
}

inline void record(SuiteResult& s, double margin, double slack) {
  ++s.trials;
  s.worst_margin = s.trials == 1 ? margin : std::min(s.worst_margin, margin);
  if (margin < -slack) ++s.violations;
}

}  // namespace selftest_detail

inline std::vector<SuiteResult> run_selftest(std::uint64_t seed = 2024, int trials = 100) {
  using namespace selftest_detail;
  Rng rng(seed);
  std::uniform_int_distribution<int> small(1, 6);
  std::uniform_int_distribution<int> mid(1, 8);
  std::vector<SuiteResult> out;

  {
    SuiteResult s{"partial_trace_index_sum"};
    for (int t = 0; t < trials; ++t) {
      const int d1 = small(rng), d2 = small(rng);
      const CMatrix f = random_hermitian(d1 * d2, rng);
      const double e1 = (kernels::partial_trace_2(f, d1, d2) - naive_ptrace2(f, d1, d2)).cwiseAbs().maxCoeff();
      const double e2 = (kernels::partial_trace_1(f, d1, d2) - naive_ptrace1(f, d1, d2)).cwiseAbs().maxCoeff();
      record(s, -std::max(e1, e2), 1e-12);
    }
    out.push_back(s);
  }
  {
    SuiteResult s{"partial_trace_contraction"};
    for (int t = 0; t < trials; ++t) {
      const int d1 = small(rng), d2 = small(rng);
      const bool psd = t % 2 == 0;
      const CMatrix f = psd ? random_state(d1 * d2, d1 * d2, rng) : random_hermitian(d1 * d2, rng);
      const CMatrix a = kernels::partial_trace_2(f, d1, d2);
      const CMatrix b = kernels::partial_trace_1(f, d1, d2);
      const double nf = trace_norm_hermitian(f);
      double m = std::min(nf - trace_norm_hermitian(a), nf - trace_norm_hermitian(b));
      m = std::min(m, -std::abs(a.trace().real() - f.trace().real()));
      m = std::min(m, -std::abs(b.trace().real() - f.trace().real()));
      if (psd) m = std::min({m, min_eigenvalue(a), min_eigenvalue(b)});
      record(s, m, 1e-9);
    }
    out.push_back(s);
  }
  {
    SuiteResult s{"singular_value_product_bound"};
    for (int t = 0; t < trials; ++t) {
      const int n = mid(rng), m = mid(rng);
      const CMatrix a = ginibre(n, n, rng);
      const CMatrix l = ginibre(n, m, rng);
      record(s, check_sv_product_bound(a, l).min_margin, 1e-9);
    }
    out.push_back(s);
  }
  {
    SuiteResult s{"trace_inequality"};
    for (int t = 0; t < trials; ++t) {
      const int r = mid(rng), c = mid(rng);
      const int k = std::uniform_int_distribution<int>(1, std::min(r, c))(rng);
      const CMatrix l = ginibre(r, c, rng);
      record(s, check_trace_inequality(l, random_isometry(c, k, rng), random_isometry(r, k, rng)).margin, 1e-9);
      // Singular-vector frames attain the bound.
      const auto sv = singular_values(l);
      const auto eq = check_trace_inequality(l, sv.right.leftCols(k), sv.left.leftCols(k));
      record(s, -std::abs(eq.margin), 1e-9);
    }
    out.push_back(s);
  }
  {
    SuiteResult s{"hilbert_schmidt_product_bound"};
    for (int t = 0; t < trials; ++t) {
      const int n = mid(rng), m = mid(rng), p = mid(rng);
      const auto r = check_hs_product_bound(ginibre(n, m, rng), ginibre(m, p, rng));
      record(s, std::min(r.norm_bound.margin, -r.trace_identity_error), 1e-9);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace qstrassen::cli
