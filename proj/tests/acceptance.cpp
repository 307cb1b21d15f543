// Acceptance runner: one pass/fail line per criterion.
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "qstrassen/qstrassen.hpp"

namespace {

using namespace qstrassen;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CMatrix naive_tr2(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i)
    for (Eigen::Index j = 0; j < d1; ++j)
      for (Eigen::Index p = 0; p < d2; ++p) out(i, j) += f(i * d2 + p, j * d2 + p);
  return out;
}

CMatrix naive_tr1(const CMatrix& f, Eigen::Index d1, Eigen::Index d2) {
  CMatrix out = CMatrix::Zero(d2, d2);
  for (Eigen::Index p = 0; p < d2; ++p)
    for (Eigen::Index q = 0; q < d2; ++q)
      for (Eigen::Index i = 0; i < d1; ++i) out(p, q) += f(i * d2 + p, i * d2 + q);
  return out;
}

bool hall_feasible(const ClassicalInstance& inst) {
  auto units = [](double v) { return std::lround(v * 12.0); };
  for (unsigned s = 1; s < (1u << inst.m); ++s) {
    long supply = 0;
    unsigned nbr = 0;
    for (int i = 0; i < inst.m; ++i) {
      if (!(s >> i & 1u)) continue;
      supply += units(inst.mu1[static_cast<std::size_t>(i)]);
      for (const auto& [a, b] : inst.edges)
        if (a == i) nbr |= 1u << b;
    }
    long demand = 0;
    for (int j = 0; j < inst.n; ++j)
      if (nbr >> j & 1u) demand += units(inst.mu2[static_cast<std::size_t>(j)]);
    if (supply > demand) return false;
  }
  return true;
}

DensityOperator state(const CMatrix& m) { return DensityOperator(HermitianOperator(m)); }

Outcome partial_trace_oracle() {
  Rng rng(101);
  std::uniform_int_distribution<int> dim(1, 6);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int d1 = dim(rng), d2 = dim(rng);
    const CMatrix f = random_hermitian(d1 * d2, rng);
    worst = std::max(worst, (kernels::partial_trace_2(f, d1, d2) - naive_tr2(f, d1, d2)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (kernels::partial_trace_1(f, d1, d2) - naive_tr1(f, d1, d2)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, fmt("500 operators, max entry error %.2e", worst)};
}

Outcome partial_trace_properties() {
  Rng rng(102);
  std::uniform_int_distribution<int> dim(1, 6);
  double trace_err = 0.0, norm_margin = 1e300, psd_margin = 1e300;
  for (int t = 0; t < 200; ++t) {
    const int d1 = dim(rng), d2 = dim(rng);
    const bool psd = t % 2 == 0;
    const CMatrix f = psd ? random_state(d1 * d2, 1 + t % (d1 * d2), rng) : random_hermitian(d1 * d2, rng);
    const double nf = trace_norm_hermitian(f);
    for (const CMatrix& m : {kernels::partial_trace_2(f, d1, d2), kernels::partial_trace_1(f, d1, d2)}) {
      trace_err = std::max(trace_err, std::abs(m.trace().real() - f.trace().real()));
      norm_margin = std::min(norm_margin, nf - trace_norm_hermitian(m));
      if (psd) psd_margin = std::min(psd_margin, min_eigenvalue(m));
    }
  }
  const bool ok = trace_err <= 1e-10 && norm_margin >= -1e-9 && psd_margin >= -1e-12;
  return {ok, fmt("200 operators, trace error %.2e, norm margin %.2e, min eigenvalue of PSD marginals %.2e", trace_err,
                  norm_margin, psd_margin)};
}

Outcome singular_value_suite() {
  Rng rng(103);
  std::uniform_int_distribution<int> dim(1, 8);
  int violations = 0;
  double sv = 1e300, ti = 1e300, sharp = 0.0, hs = 1e300, ident = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = dim(rng), m = dim(rng);
    const double r = check_sv_product_bound(ginibre(n, n, rng), ginibre(n, m, rng)).min_margin;
    sv = std::min(sv, r);
    if (r < -1e-9) ++violations;
  }
  for (int t = 0; t < 100; ++t) {
    const int r = dim(rng), c = dim(rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(r, c))(rng);
    const CMatrix l = ginibre(r, c, rng);
    const double m = check_trace_inequality(l, random_isometry(c, k, rng), random_isometry(r, k, rng)).margin;
    ti = std::min(ti, m);
    if (m < -1e-9) ++violations;
    const auto s = singular_values(l);
    const double eq = std::abs(check_trace_inequality(l, s.right.leftCols(k), s.left.leftCols(k)).margin);
    sharp = std::max(sharp, eq);
    if (eq > 1e-9) ++violations;
  }
  for (int t = 0; t < 100; ++t) {
    const int n = dim(rng), m = dim(rng), p = dim(rng);
    const auto r = check_hs_product_bound(ginibre(n, m, rng), ginibre(m, p, rng));
    hs = std::min(hs, r.norm_bound.margin);
    ident = std::max(ident, r.trace_identity_error);
    if (r.norm_bound.margin < -1e-9 || r.trace_identity_error > 1e-9) ++violations;
  }
  return {violations == 0, fmt("%d violations; margins: product %.2e, trace %.2e, HS %.2e; sharpness %.2e, "
                               "trace identity %.2e",
                               violations, sv, ti, hs, sharp, ident)};
}

Outcome coupling_round_trip() {
  Rng rng(104);
  std::uniform_int_distribution<int> dim(2, 4);
  int ok = 0;
  double min_mu = 1e300, max_err = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int d1 = dim(rng), d2 = dim(rng);
    const int k = std::uniform_int_distribution<int>(2, std::min(6, d1 * d2))(rng);
    const auto c = coupled_instance(d1, d2, k, rng);
    const auto v = has_coupling(state(c.rho1), state(c.rho2), Subspace(d1 * d2, c.basis));
    min_mu = std::min(min_mu, v.mu);
    double err = 1e300;
    if (v.certificate) {
      const CMatrix& r = v.certificate->matrix();
      err = trace_norm_hermitian(CMatrix(kernels::partial_trace_2(r, d1, d2) - c.rho1)) +
            trace_norm_hermitian(CMatrix(kernels::partial_trace_1(r, d1, d2) - c.rho2));
    }
    max_err = std::max(max_err, err);
    if (v.mu >= 1.0 - 1e-4 && err <= 1e-3) ++ok;
  }
  return {ok == 50, fmt("%d/50 certified, min mu %.8f, max certificate marginal error %.2e", ok, min_mu, max_err)};
}

Outcome infeasibility_detection() {
  const DensityOperator e0(HermitianOperator::diagonal({1.0, 0.0}));
  CVector v = CVector::Zero(4);
  v(3) = 1.0;
  const auto obs = mu(e0, e0, subspace_from_vectors(4, {v}));
  Rng rng(105);
  int rejected = 0;
  double worst_upper = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto c = coupled_instance(3, 3, 2, rng);
    const CMatrix r1 = mix_with_random_state(c.rho1, 0.2, rng);
    const auto h = has_coupling(state(r1), state(c.rho2), Subspace(9, c.basis));
    worst_upper = std::max(worst_upper, h.mu_upper);
    if (!h.exists && h.mu_upper < 1.0 - 1e-4) ++rejected;
  }
  return {obs.upper_bound <= 1e-6 && rejected == 50,
          fmt("obstruction mu <= %.2e; %d/50 perturbed rejected, max dual bound %.6f", obs.upper_bound, rejected,
              worst_upper)};
}

Outcome duality() {
  Rng rng(106);
  std::vector<std::tuple<CMatrix, CMatrix, CMatrix>> cases;
  for (int t = 0; t < 15; ++t) {
    const auto c = coupled_instance(3, 3, 2 + t % 4, rng);
    cases.emplace_back(c.rho1, c.rho2, c.basis);
    const auto d = coupled_instance(3, 3, 2, rng);
    cases.emplace_back(mix_with_random_state(d.rho1, 0.2, rng), d.rho2, d.basis);
  }
  const auto g = geometric_instance(4, 0.5, 2, rng);
  cases.emplace_back(g.rho1, g.rho2, g.basis);
  int solved = 0, bad = 0;
  double worst_gap = 0.0, worst_trivial = 1e300;
  for (const auto& [r1, r2, b] : cases) {
    const Eigen::Index d1 = r1.rows(), d2 = r2.rows();
    const Subspace x(d1 * d2, b);
    const auto m = mu(state(r1), state(r2), x);
    // Phi^*(I, I) = 2I; its margin over P_X is computed from scratch.
    const CMatrix slack = 2.0 * CMatrix::Identity(d1 * d2, d1 * d2) - x.projector().matrix();
    const double trivial = min_eigenvalue(slack);
    const auto cert = sdp::verify_duality_certificates(m.problem, m.solution);
    worst_trivial = std::min(worst_trivial, trivial);
    if (trivial < 0.0 || !cert.all_pass) ++bad;
    if (m.solution.status == SolveStatus::Optimal) {
      ++solved;
      worst_gap = std::max(worst_gap, m.solution.gap);
      if (m.solution.gap > 1e-6) ++bad;
    }
  }
  return {bad == 0 && solved == static_cast<int>(cases.size()),
          fmt("%d/%zu optimal, max gap %.2e, min eigenvalue of 2I - P_X %.3f, %d failures", solved, cases.size(),
              worst_gap, worst_trivial, bad)};
}

Outcome f_ladder_limit() {
  Rng rng(107);
  int ok = 0;
  double worst_rise = 0.0, worst_tail = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int k = 1 + t % 6;
    const auto c = coupled_instance(3, 4, k, rng);
    const CMatrix basis = complete_basis(c.basis, rng);
    const auto rep = f_ladder(HermitianOperator(c.rho1), HermitianOperator(c.rho2), basis, 12);
    bool good = true;
    for (std::size_t i = 1; i < rep.levels.size(); ++i) {
      const double rise = rep.levels[i].value - rep.levels[i - 1].value;
      worst_rise = std::max(worst_rise, rise);
      if (rise > 2e-6) good = false;
    }
    for (const auto& l : rep.levels) {
      if (l.n < k) continue;
      worst_tail = std::max(worst_tail, l.value);
      if (l.value > 1e-4) good = false;
    }
    if (good) ++ok;
  }
  return {ok == 20, fmt("%d/20 instances, max rise %.2e, max mu_n for n >= k %.2e", ok, worst_rise, worst_tail)};
}

Outcome sdp_ladder_limit() {
  int ok = 0;
  double worst_top = 1e300, worst_match = 0.0, worst_dom = 1e300;
  for (int t = 0; t < 10; ++t) {
    Rng rng(1080 + t);
    const auto c = geometric_instance(16, 0.5, 2, rng);
    const DensityOperator r1 = state(c.rho1), r2 = state(c.rho2);
    const Subspace x(256, c.basis);
    const auto rep = sdp_ladder(r1, r2, x, 16);
    const auto full = mu(r1, r2, x);
    const auto& top = rep.levels.back();
    bool good = !top.skipped && top.value >= 1.0 - 1e-4 && std::abs(top.value - full.value) <= 1e-5;
    worst_top = std::min(worst_top, top.value);
    worst_match = std::max(worst_match, std::abs(top.value - full.value));
    for (const auto& l : rep.levels) {
      if (l.skipped) continue;
      worst_dom = std::min(worst_dom, l.domination_margin);
      if (l.domination_margin < -1e-9) good = false;
    }
    if (good) ++ok;
  }
  return {ok == 10, fmt("%d/10 instances, min top mu %.8f, max |top - mu| %.2e, min domination margin %.2e", ok,
                        worst_top, worst_match, worst_dom)};
}

Outcome classical_equivalence() {
  Rng rng(109);
  int agree = 0, hall = 0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = random_classical(4, 4, rng);
    const auto r = classical_quantum_consistency(inst);
    if (r.agree) ++agree;
    if (r.classical_feasible == hall_feasible(inst)) ++hall;
  }
  return {agree == 100 && hall == 100, fmt("quantum/max-flow %d/100, max-flow/Hall %d/100", agree, hall)};
}

Outcome fiber_suite() {
  Rng rng(110);
  double member = 0.0, glue_err = 0.0, zero_err = 0.0, floor_margin = 1e300;
  for (int t = 0; t < 5; ++t) {
    const auto c = coupled_instance(2, 3, 3, rng);
    const FiberSpec f(HermitianOperator(c.rho1), HermitianOperator(c.rho2));
    member = std::max(member, dist_to_fiber(BipartiteOperator(2, 3, c.rho), f).distance);
    // A dominated operator, glued: the result is a member too.
    const CMatrix gamma = 0.5 * f.product_coupling().matrix();
    const auto s = glue_coupling(BipartiteOperator(2, 3, gamma), f);
    glue_err = std::max({glue_err, (kernels::partial_trace_2(s.matrix(), 2, 3) - c.rho1).cwiseAbs().maxCoeff(),
                         (kernels::partial_trace_1(s.matrix(), 2, 3) - c.rho2).cwiseAbs().maxCoeff()});
    member = std::max(member, dist_to_fiber(s, f).distance);
    zero_err = std::max(zero_err, std::abs(dist_to_fiber(BipartiteOperator::zero(2, 3), f).distance - f.trace()));
  }
  for (int t = 0; t < 20; ++t) {
    const FiberSpec a(HermitianOperator(random_state(2, 2, rng)), HermitianOperator(random_state(2, 2, rng)));
    const FiberSpec b(HermitianOperator(random_state(2, 2, rng)), HermitianOperator(random_state(2, 2, rng)));
    const auto sd = semidistance_lower_bound(a, b, 2, {}, static_cast<std::uint64_t>(t));
    floor_margin = std::min(floor_margin, sd.lower_bound - sd.marginal_floor);
  }
  const bool ok = member <= 1e-6 && glue_err <= 1e-9 && zero_err <= 1e-6 && floor_margin >= -1e-9;
  return {ok, fmt("member distance %.2e, glue marginal error %.2e, |dist(0) - tr| %.2e, semidistance - floor >= %.2e",
                  member, glue_err, zero_err, floor_margin)};
}

Outcome weak_vs_trace() {
  bool ok = true;
  for (int n = 4; n <= 12; ++n) {
    const auto r = weak_vs_trace_demo(n);
    ok = ok && r.pairing == 0.0 && r.trace2_pairing == 0.0 && r.trace1_gap == 1.0;
  }
  return {ok, "n = 4..12: pairings exactly 0, trace-norm gap of tr_1 exactly 1"};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "partial trace vs index-sum oracle", 5, partial_trace_oracle},
      {2, "partial trace trace/norm/positivity", 10, partial_trace_properties},
      {3, "singular value inequalities", 20, singular_value_suite},
      {4, "coupling round-trip", 300, coupling_round_trip},
      {5, "infeasibility detection", 300, infeasibility_detection},
      {6, "duality certificates", 600, duality},
      {7, "f-ladder monotonicity and limit", 600, f_ladder_limit},
      {8, "SDP ladder on geometric marginals", 900, sdp_ladder_limit},
      {9, "classical equivalence", 120, classical_equivalence},
      {10, "fiber suite", 300, fiber_suite},
      {11, "weak vs trace-norm convergence", 1, weak_vs_trace},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    std::printf("[%s] criterion %d (%s): %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " OVER TIME LIMIT");
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
