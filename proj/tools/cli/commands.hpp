#pragma once

// Subcommand execution: problem in, report JSON (or CSV) and exit code out.
// Exit codes: 0 verdict reached, 2 undecided, 1 error.

#include <chrono>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "cli/generators.hpp"
#include "cli/problem_file.hpp"
#include "cli/selftest.hpp"

namespace qstrassen::cli {

enum ExitCode : int { kVerdict = 0, kError = 1, kUndecided = 2 };

struct Overrides {
  std::optional<double> gap_tol;
  std::optional<double> eps_decision;
  std::optional<int> max_iters;
  std::optional<int> levels;
  int samples = 20;
  std::optional<std::uint64_t> seed;
};

struct CommandResult {
  json report;
  int exit_code = kVerdict;
  std::string csv;  ///< tabular form (ladders: one row per level; otherwise key,value rows)
};

inline SolverConfig effective_config(const Problem& p, const Overrides& o) {
  SolverConfig c = p.solver;
  if (o.gap_tol) c.gap_tol = *o.gap_tol;
  if (o.eps_decision) c.eps_decision = *o.eps_decision;
  if (o.max_iters) c.max_iters = *o.max_iters;
  return c;
}

inline json config_echo(const SolverConfig& c) {
  json j = solver_to_json(c);
  j["balance_ratio"] = c.balance_ratio;
  j["balance_factor"] = c.balance_factor;
  j["check_every"] = c.check_every;
  j["warm_start"] = c.warm_start;
  return j;
}

inline std::string key_value_csv(const json& report) {
  std::ostringstream os;
  os << "key,value\n";
  for (auto it = report.begin(); it != report.end(); ++it)
    if (it->is_primitive()) os << it.key() << "," << (it->is_string() ? it->get<std::string>() : it->dump()) << "\n";
  return os.str();
}

inline json residuals_json(const sdp::Residuals& r) {
  return {{"psd_violation", r.psd_violation},
          {"constraint_violation", r.constraint_violation},
          {"adjoint_violation", r.adjoint_violation}};
}

inline void require_kind(const Problem& p, std::initializer_list<ProblemKind> kinds, const std::string& cmd) {
  for (auto k : kinds)
    if (p.kind == k) return;
  throw Error("command '" + cmd + "' does not accept problems of kind '" + to_string(p.kind) + "'");
}

inline Subspace problem_subspace(const Problem& p) { return subspace_from_vectors(p.d1 * p.d2, p.subspace); }

inline CommandResult run_check(const Problem& p, const SolverConfig& cfg) {
  require_kind(p, {ProblemKind::Coupling, ProblemKind::FLadder, ProblemKind::SdpLadder}, "check");
  const DensityOperator r1(HermitianOperator(*p.rho1));
  const DensityOperator r2(HermitianOperator(*p.rho2));
  const auto v = has_coupling(r1, r2, problem_subspace(p), cfg);
  const auto& s = v.detail.solution;
  CommandResult out;
  out.report = {{"command", "check"},
                {"verdict", v.exists},
                {"conclusive", v.conclusive},
                {"mu", v.mu},
                {"mu_upper", v.mu_upper},
                {"gap", s.gap},
                {"status", sdp::to_string(s.status)},
                {"iterations", s.iterations},
                {"seconds", s.seconds},
                {"marginal_error", v.marginal_error},
                {"support_leak", v.support_leak},
                {"residuals", residuals_json(s.residuals)}};
  if (v.certificate) out.report["certificate"] = to_json(v.certificate->matrix());
  // Not optimal and the certified interval straddles the threshold: undecided.
  out.exit_code = v.conclusive ? kVerdict : kUndecided;
  return out;
}

inline CommandResult run_mu(const Problem& p, const SolverConfig& cfg) {
  require_kind(p, {ProblemKind::Coupling, ProblemKind::FLadder, ProblemKind::SdpLadder}, "mu");
  const DensityOperator r1(HermitianOperator(*p.rho1));
  const DensityOperator r2(HermitianOperator(*p.rho2));
  const auto m = mu(r1, r2, problem_subspace(p), cfg);
  const auto& s = m.solution;
  const auto cert = sdp::verify_duality_certificates(m.problem, s);
  CommandResult out;
  out.report = {{"command", "mu"},
                {"mu", m.value},
                {"mu_upper", m.upper_bound},
                {"gap", s.gap},
                {"status", sdp::to_string(s.status)},
                {"iterations", s.iterations},
                {"seconds", s.seconds},
                {"residuals", residuals_json(s.residuals)},
                {"certificates",
                 {{"trivial_feasible", cert.trivial_feasible},
                  {"trivial_value", cert.trivial_value},
                  {"returned_feasible", cert.returned_feasible},
                  {"weak_duality", cert.weak_duality}}}};
  out.exit_code = s.status == SolveStatus::Optimal ? kVerdict : kUndecided;
  return out;
}

inline json levels_json(const LadderReport& rep) {
  json arr = json::array();
  for (const auto& l : rep.levels) {
    arr.push_back({{"n", l.n},
                   {"skipped", l.skipped},
                   {"value", l.value},
                   {"lower", l.lower},
                   {"upper", l.upper},
                   {"gap", l.gap},
                   {"iterations", l.iterations},
                   {"seconds", l.seconds},
                   {"status", l.skipped ? "skipped" : sdp::to_string(l.status)}});
  }
  return arr;
}

inline std::string ladder_csv(const LadderReport& rep) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "n,skipped,value,lower,upper,gap,iterations,seconds,status\n";
  for (const auto& l : rep.levels)
    os << l.n << "," << (l.skipped ? 1 : 0) << "," << l.value << "," << l.lower << "," << l.upper << "," << l.gap << ","
       << l.iterations << "," << l.seconds << "," << (l.skipped ? "skipped" : sdp::to_string(l.status)) << "\n";
  return os.str();
}

inline CommandResult ladder_result(const std::string& cmd, const LadderReport& rep) {
  CommandResult out;
  out.report = {{"command", cmd},
                {"criterion", to_string(rep.criterion)},
                {"verdict", to_string(rep.verdict)},
                {"eps_decision", rep.eps_decision},
                {"scale", rep.scale},
                {"window", rep.window},
                {"levels", levels_json(rep)}};
  out.csv = ladder_csv(rep);
  out.exit_code = rep.verdict == LadderVerdict::Undecided ? kUndecided : kVerdict;
  return out;
}

inline CommandResult run_ladder_f(const Problem& p, const SolverConfig& cfg, const Overrides& o) {
  require_kind(p, {ProblemKind::FLadder, ProblemKind::Coupling}, "ladder-f");
  const CMatrix basis = subspace_columns(p);
  const int n_max = o.levels.value_or(p.levels.value_or(static_cast<int>(basis.cols())));
  return ladder_result("ladder-f", f_ladder(HermitianOperator(*p.rho1), HermitianOperator(*p.rho2), basis, n_max, cfg));
}

inline CommandResult run_ladder_sdp(const Problem& p, const SolverConfig& cfg, const Overrides& o) {
  require_kind(p, {ProblemKind::SdpLadder, ProblemKind::Coupling}, "ladder-sdp");
  const int full = static_cast<int>(std::min(p.d1, p.d2));
  const int n_max = o.levels.value_or(p.levels.value_or(full));
  const DensityOperator r1(HermitianOperator(*p.rho1));
  const DensityOperator r2(HermitianOperator(*p.rho2));
  return ladder_result("ladder-sdp", sdp_ladder(r1, r2, problem_subspace(p), n_max, cfg));
}

inline CommandResult run_fiber_dist(const Problem& p, const SolverConfig& cfg, const Overrides& o) {
  require_kind(p, {ProblemKind::FiberDist}, "fiber-dist");
  const FiberSpec fiber(HermitianOperator(*p.rho1), HermitianOperator(*p.rho2));
  const auto d = dist_to_fiber(BipartiteOperator(p.d1, p.d2, *p.beta), fiber, cfg);
  CommandResult out;
  out.report = {{"command", "fiber-dist"},
                {"distance", d.distance},
                {"lower_bound", d.lower_bound},
                {"gap", d.gap},
                {"status", sdp::to_string(d.status)},
                {"iterations", d.iterations},
                {"nearest", to_json(d.nearest.matrix())}};
  bool decided = d.status == SolveStatus::Optimal;
  if (p.sigma1 && o.samples > 0) {
    const FiberSpec other(HermitianOperator(*p.sigma1), HermitianOperator(*p.sigma2));
    const std::uint64_t seed = o.seed.value_or(p.seed.value_or(0));
    const auto sd = semidistance_lower_bound(other, fiber, o.samples, cfg, seed);
    out.report["semidistance"] = {{"lower_bound", sd.lower_bound},
                                  {"marginal_floor", sd.marginal_floor},
                                  {"samples", o.samples},
                                  {"seed", seed},
                                  {"sample_lower_bounds", sd.sample_distances}};
  }
  out.exit_code = decided ? kVerdict : kUndecided;
  return out;
}

inline CommandResult run_classical(const Problem& p, const SolverConfig& cfg) {
  require_kind(p, {ProblemKind::Classical}, "classical");
  const auto r = classical_quantum_consistency(*p.classical, cfg);
  CommandResult out;
  out.report = {{"command", "classical"},
                {"feasible", r.classical_feasible},
                {"flow_value", r.classical.flow_value},
                {"exact_arithmetic", r.classical.exact},
                {"quantum_verdict", r.quantum_verdict},
                {"quantum_mu", r.mu},
                {"quantum_mu_upper", r.mu_upper},
                {"agree", r.agree}};
  if (r.classical.coupling) out.report["coupling"] = *r.classical.coupling;
  out.exit_code = kVerdict;
  return out;
}

inline CommandResult run_selftest_command(const Overrides& o) {
  const auto suites = run_selftest(o.seed.value_or(2024));
  CommandResult out;
  json arr = json::array();
  bool ok = true;
  std::ostringstream csv;
  csv << "suite,trials,violations,worst_margin,passed\n";
  for (const auto& s : suites) {
    arr.push_back({{"suite", s.name}, {"trials", s.trials}, {"violations", s.violations},
                   {"worst_margin", s.worst_margin}, {"passed", s.passed()}});
    csv << s.name << "," << s.trials << "," << s.violations << "," << s.worst_margin << "," << (s.passed() ? 1 : 0)
        << "\n";
    ok = ok && s.passed();
  }
  out.report = {{"command", "selftest"}, {"suites", arr}, {"all_passed", ok}};
  out.csv = csv.str();
  out.exit_code = ok ? kVerdict : kError;
  return out;
}

/// Runs a problem-consuming subcommand and stamps the config echo and timing.
inline CommandResult run_command(const std::string& cmd, const Problem& p, const Overrides& o) {
  const SolverConfig cfg = effective_config(p, o);
  const auto t0 = std::chrono::steady_clock::now();
  CommandResult r;
  if (cmd == "check") r = run_check(p, cfg);
  else if (cmd == "mu") r = run_mu(p, cfg);
  else if (cmd == "ladder-f") r = run_ladder_f(p, cfg, o);
  else if (cmd == "ladder-sdp") r = run_ladder_sdp(p, cfg, o);
  else if (cmd == "fiber-dist") r = run_fiber_dist(p, cfg, o);
  else if (cmd == "classical") r = run_classical(p, cfg);
  else throw Error("unknown command '" + cmd + "'");
  r.report["config"] = config_echo(cfg);
  r.report["kind"] = to_string(p.kind);
  r.report["dims"] = {p.d1, p.d2};
  r.report["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.csv.empty()) r.csv = key_value_csv(r.report);
  return r;
}

}  // namespace qstrassen::cli
