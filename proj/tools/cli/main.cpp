#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "cli/commands.hpp"

namespace {

using namespace qstrassen;
using namespace qstrassen::cli;

struct Options {
  std::vector<std::string> inputs;
  std::string out;
  std::string format = "json";
  Overrides overrides;
  double gap_tol = 0, eps = 0;
  int max_iters = 0, levels = 0;
  std::uint64_t seed = 0;
};

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QSTRASSEN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

struct Job {
  std::string path;
  CommandResult result;
  std::string error;
};

int combine(int a, int b) {
  if (a == kError || b == kError) return kError;
  return std::max(a, b);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") std::cout << text;
  else write_text(o.out, text);
}

int run_problems(const std::string& cmd, const Options& o) {
  std::vector<Job> jobs(o.inputs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].path = o.inputs[i];

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i].result = run_command(cmd, load_problem(jobs[i].path), o.overrides);
      } catch (const std::exception& e) {
        jobs[i].error = e.what();
        jobs[i].result.exit_code = kError;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = worker_count(jobs.size());
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kVerdict;
  for (const auto& j : jobs) {
    code = combine(code, j.result.exit_code);
    if (!j.error.empty()) std::cerr << "qstrassen: " << j.path << ": " << j.error << "\n";
  }

  if (o.format == "csv") {
    std::string text;
    bool header = false;
    for (const auto& j : jobs) {
      if (!j.error.empty()) continue;
      std::istringstream is(j.result.csv);
      std::string line;
      std::getline(is, line);
      if (jobs.size() == 1) {
        text += line + "\n";
      } else if (!header) {
        text += "file," + line + "\n";
        header = true;
      }
      while (std::getline(is, line)) text += (jobs.size() == 1 ? "" : j.path + ",") + line + "\n";
    }
    emit(o, text);
  } else if (jobs.size() == 1) {
    if (jobs[0].error.empty()) emit(o, canonical_dump(jobs[0].result.report));
    else emit(o, canonical_dump(json{{"error", jobs[0].error}, {"file", jobs[0].path}}));
  } else {
    json arr = json::array();
    for (const auto& j : jobs) {
      json item = {{"file", j.path}, {"exit_code", j.result.exit_code}};
      if (j.error.empty()) item["report"] = j.result.report;
      else item["error"] = j.error;
      arr.push_back(std::move(item));
    }
    emit(o, canonical_dump(json{{"results", arr}, {"exit_code", code}}));
  }
  return code;
}

void add_common(CLI::App* sub, Options& o, bool needs_input) {
  if (needs_input) sub->add_option("problems", o.inputs, "problem file(s); several run as a batch")->required()->check(CLI::ExistingFile);
  sub->add_option("--out,-o", o.out, "write the report here instead of stdout");
  sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--gap-tol", o.gap_tol, "certified duality gap to stop at")->check(CLI::PositiveNumber);
  sub->add_option("--eps-decision", o.eps, "decision threshold")->check(CLI::PositiveNumber);
  sub->add_option("--max-iters", o.max_iters, "iteration cap per solve")->check(CLI::PositiveNumber);
  sub->add_option("--levels", o.levels, "highest ladder level")->check(CLI::PositiveNumber);
  sub->add_option("--samples", o.overrides.samples, "semidistance samples (fiber-dist)")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "random seed");
}

void finalize(CLI::App* sub, Options& o) {
  if (sub->count("--gap-tol")) o.overrides.gap_tol = o.gap_tol;
  if (sub->count("--eps-decision")) o.overrides.eps_decision = o.eps;
  if (sub->count("--max-iters")) o.overrides.max_iters = o.max_iters;
  if (sub->count("--levels")) o.overrides.levels = o.levels;
  if (sub->count("--seed")) o.overrides.seed = o.seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Strassen coupling and fiber toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kFormatVersion));

  Options o;
  const std::vector<std::pair<std::string, std::string>> solvers = {
      {"check", "decide whether a coupling supported on the subspace exists"},
      {"mu", "solve the marginal SDP and report mu with certificates"},
      {"ladder-f", "run the f-minimization ladder over a subspace basis"},
      {"ladder-sdp", "run the truncated marginal-SDP ladder"},
      {"fiber-dist", "trace distance from beta to the fiber (and semidistance bound)"},
      {"classical", "classical Strassen via max-flow, compared with the quantum solver"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : solvers) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, o, true);
    subs.push_back(s);
  }
  auto* selftest = app.add_subcommand("selftest", "randomized checks of the partial-trace and norm inequalities");
  add_common(selftest, o, false);

  GenSpec g;
  std::string kind = "coupling";
  bool infeasible = false;
  auto* gen = app.add_subcommand("gen", "write a random problem file");
  gen->add_option("--kind", kind, "problem kind")
      ->check(CLI::IsMember({"coupling", "f_ladder", "sdp_ladder", "fiber_dist", "classical"}));
  gen->add_option("--d1", g.d1, "first factor dimension")->check(CLI::PositiveNumber);
  gen->add_option("--d2", g.d2, "second factor dimension")->check(CLI::PositiveNumber);
  gen->add_flag("--infeasible", infeasible, "make the coupling instance infeasible");
  gen->add_option("--seed", g.seed, "random seed");
  gen->add_option("--decay", g.decay, "spectral ratio for sdp_ladder instances");
  gen->add_option("--mix", g.mix, "mixing weight for infeasible instances");
  gen->add_option("--subspace-dim", g.subspace_dim, "subspace dimension (0: default)");
  gen->add_option("--out,-o", o.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (gen->parsed()) {
      g.kind = parse_kind(kind);
      g.feasible = !infeasible;
      emit(o, canonical_dump(problem_to_json(generate_instance(g))));
      return kVerdict;
    }
    if (selftest->parsed()) {
      finalize(selftest, o);
      const auto r = run_selftest_command(o.overrides);
      emit(o, o.format == "csv" ? r.csv : canonical_dump(r.report));
      return r.exit_code;
    }
    for (auto* s : subs) {
      if (!s->parsed()) continue;
      finalize(s, o);
      return run_problems(s->get_name(), o);
    }
  } catch (const std::exception& e) {
    std::cerr << "qstrassen: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
