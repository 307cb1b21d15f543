#pragma once

// "qstrassen/1" problem files. Matrices are row-major nested arrays of
// [re, im] pairs; bipartite matrices use the composite index (i, p) -> i*d2 + p.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qstrassen/qstrassen.hpp"

namespace qstrassen::cli {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "qstrassen/1";

enum class ProblemKind { Coupling, FLadder, SdpLadder, FiberDist, Classical };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Coupling: return "coupling";
    case ProblemKind::FLadder: return "f_ladder";
    case ProblemKind::SdpLadder: return "sdp_ladder";
    case ProblemKind::FiberDist: return "fiber_dist";
    case ProblemKind::Classical: return "classical";
  }
  return "coupling";
}

inline ProblemKind parse_kind(const std::string& s) {
  if (s == "coupling") return ProblemKind::Coupling;
  if (s == "f_ladder") return ProblemKind::FLadder;
  if (s == "sdp_ladder") return ProblemKind::SdpLadder;
  if (s == "fiber_dist") return ProblemKind::FiberDist;
  if (s == "classical") return ProblemKind::Classical;
  throw Error("unknown problem kind '" + s + "'");
}

struct Problem {
  ProblemKind kind = ProblemKind::Coupling;
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
  std::optional<CMatrix> rho1;
  std::optional<CMatrix> rho2;
  std::vector<CVector> subspace;
  SolverConfig solver;
  std::optional<std::uint64_t> seed;
  std::optional<int> levels;
  std::optional<CMatrix> beta;
  std::optional<CMatrix> sigma1;
  std::optional<CMatrix> sigma2;
  std::optional<ClassicalInstance> classical;
  json metadata = json::object();
};

// ---------------------------------------------------------------------------
// JSON <-> matrices

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

inline Complex complex_from_json(const json& z, const std::string& where) {
  if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
    throw Error(where + ": expected a [re, im] pair");
  return {z[0].get<double>(), z[1].get<double>()};
}

inline CMatrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw DimensionError(name + ": expected " + std::to_string(rows) + " rows to match dims");
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DimensionError(name + ": row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = complex_from_json(row[static_cast<std::size_t>(c)], name + "[" + std::to_string(i) + "]");
  }
  return m;
}

inline CVector vector_from_json(const json& j, Eigen::Index n, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw DimensionError(name + ": expected length " + std::to_string(n));
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_from_json(j[static_cast<std::size_t>(i)], name);
  return v;
}

/// Loads a Hermitian matrix, rejecting asymmetry above 1e-9 and symmetrizing
/// what remains.
inline CMatrix hermitian_from_json(const json& j, Eigen::Index n, const std::string& name) {
  CMatrix m = matrix_from_json(j, n, n, name);
  const double asym = detail::max_asymmetry(m);
  if (asym > 1e-9) throw InvariantError("Hermiticity of " + name, asym);
  return 0.5 * (m + m.adjoint());
}

inline void require_psd(const CMatrix& m, const std::string& name) {
  const double lmin = min_eigenvalue(m);
  if (lmin < -1e-9) throw InvariantError("PSD of " + name, -lmin);
}

inline json solver_to_json(const SolverConfig& c) {
  return {{"gap_tol", c.gap_tol}, {"eps_decision", c.eps_decision}, {"max_iters", c.max_iters},
          {"penalty_init", c.penalty_init}};
}

inline SolverConfig solver_from_json(const json& j) {
  SolverConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error("solver: expected an object");
  c.gap_tol = j.value("gap_tol", c.gap_tol);
  c.eps_decision = j.value("eps_decision", c.eps_decision);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.penalty_init = j.value("penalty_init", c.penalty_init);
  if (!(c.gap_tol > 0.0)) throw InvariantError("positive gap_tol", c.gap_tol);
  if (!(c.eps_decision > 0.0 && c.eps_decision < 1.0)) throw InvariantError("eps_decision in (0, 1)", c.eps_decision);
  if (c.max_iters < 1) throw InvariantError("positive max_iters", c.max_iters);
  if (!(c.penalty_init > 0.0)) throw InvariantError("positive penalty_init", c.penalty_init);
  return c;
}

// ---------------------------------------------------------------------------

inline json problem_to_json(const Problem& p) {
  json j;
  j["version"] = kFormatVersion;
  j["kind"] = to_string(p.kind);
  j["dims"] = {p.d1, p.d2};
  if (p.rho1) j["rho1"] = to_json(*p.rho1);
  if (p.rho2) j["rho2"] = to_json(*p.rho2);
  if (!p.subspace.empty()) {
    json s = json::array();
    for (const auto& v : p.subspace) s.push_back(to_json(v));
    j["subspace"] = std::move(s);
  }
  j["solver"] = solver_to_json(p.solver);
  if (p.seed) j["seed"] = *p.seed;
  if (p.levels) j["levels"] = *p.levels;
  if (p.beta) j["beta"] = to_json(*p.beta);
  if (p.sigma1) j["sigma1"] = to_json(*p.sigma1);
  if (p.sigma2) j["sigma2"] = to_json(*p.sigma2);
  if (p.classical) {
    json e = json::array();
    for (const auto& [a, b] : p.classical->edges) e.push_back({a, b});
    j["classical"] = {{"mu1", p.classical->mu1}, {"mu2", p.classical->mu2}, {"edges", std::move(e)}};
  }
  if (!p.metadata.empty()) j["metadata"] = p.metadata;
  return j;
}

/// Sorted keys (nlohmann's object order) and shortest round-trip doubles.
inline std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

inline Problem problem_from_json(const json& j) {
  if (!j.is_object()) throw Error("problem file: top level must be an object");
  const std::string version = j.value("version", std::string());
  if (version != kFormatVersion)
    throw Error("version mismatch: expected '" + std::string(kFormatVersion) + "', found '" + version + "'");
  Problem p;
  p.kind = parse_kind(j.value("kind", std::string()));
  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 2)
    throw DimensionError("dims: expected [d1, d2]");
  p.d1 = j["dims"][0].get<Eigen::Index>();
  p.d2 = j["dims"][1].get<Eigen::Index>();
  if (p.d1 < 1 || p.d2 < 1) throw DimensionError("dims must be positive");
  p.solver = solver_from_json(j.contains("solver") ? j["solver"] : json());
  if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("levels")) p.levels = j["levels"].get<int>();
  if (j.contains("metadata")) p.metadata = j["metadata"];
  const Eigen::Index big = p.d1 * p.d2;

  if (p.kind == ProblemKind::Classical) {
    if (!j.contains("classical")) throw Error("classical problem needs a 'classical' object");
    const json& c = j["classical"];
    ClassicalInstance inst;
    inst.m = static_cast<int>(p.d1);
    inst.n = static_cast<int>(p.d2);
    inst.mu1 = c.at("mu1").get<std::vector<double>>();
    inst.mu2 = c.at("mu2").get<std::vector<double>>();
    for (const auto& e : c.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error("classical.edges: expected [i, j] pairs");
      inst.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    inst.validate();
    p.classical = std::move(inst);
    return p;
  }

  if (!j.contains("rho1") || !j.contains("rho2")) throw Error("problem needs rho1 and rho2");
  p.rho1 = hermitian_from_json(j["rho1"], p.d1, "rho1");
  p.rho2 = hermitian_from_json(j["rho2"], p.d2, "rho2");
  require_psd(*p.rho1, "rho1");
  require_psd(*p.rho2, "rho2");
  const double t1 = p.rho1->trace().real();
  const double t2 = p.rho2->trace().real();
  if (std::abs(t1 - t2) > 1e-9 * std::max(1.0, std::abs(t1)))
    throw InvariantError("Sigma membership", std::abs(t1 - t2), "tr rho1 must equal tr rho2");
  if (p.kind == ProblemKind::Coupling || p.kind == ProblemKind::SdpLadder) {
    if (std::abs(t1 - 1.0) > 1e-9) throw InvariantError("unit trace", std::abs(t1 - 1.0), "marginals must be states");
  }

  if (j.contains("subspace")) {
    const json& s = j["subspace"];
    if (!s.is_array()) throw Error("subspace: expected a list of vectors");
    for (std::size_t i = 0; i < s.size(); ++i)
      p.subspace.push_back(vector_from_json(s[i], big, "subspace[" + std::to_string(i) + "]"));
  }
  if (p.kind == ProblemKind::Coupling || p.kind == ProblemKind::FLadder || p.kind == ProblemKind::SdpLadder) {
    if (p.subspace.empty()) throw InvariantError("nonempty subspace", 0.0, "problem needs subspace vectors");
  }
  if (p.kind == ProblemKind::FLadder) {
    CMatrix b(big, static_cast<Eigen::Index>(p.subspace.size()));
    for (std::size_t i = 0; i < p.subspace.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = p.subspace[i];
    const double defect = orthonormality_defect(b);
    if (defect > 1e-8) throw InvariantError("orthonormality of subspace basis", defect);
  }
  if (p.kind == ProblemKind::FiberDist) {
    if (!j.contains("beta")) throw Error("fiber_dist problem needs beta");
    p.beta = hermitian_from_json(j["beta"], big, "beta");
    if (j.contains("sigma1") != j.contains("sigma2")) throw Error("sigma1 and sigma2 must be given together");
    if (j.contains("sigma1")) {
      p.sigma1 = hermitian_from_json(j["sigma1"], p.d1, "sigma1");
      p.sigma2 = hermitian_from_json(j["sigma2"], p.d2, "sigma2");
      require_psd(*p.sigma1, "sigma1");
      require_psd(*p.sigma2, "sigma2");
      const double s1 = p.sigma1->trace().real();
      const double s2 = p.sigma2->trace().real();
      if (std::abs(s1 - s2) > 1e-9 * std::max(1.0, std::abs(s1)))
        throw InvariantError("Sigma membership", std::abs(s1 - s2), "tr sigma1 must equal tr sigma2");
    }
  }
  if (p.levels && *p.levels < 1) throw InvariantError("positive levels", *p.levels);
  return p;
}

inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error("parse error in '" + path + "': " + e.what());
  }
  return problem_from_json(j);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

inline void save_problem(const Problem& p, const std::string& path) { write_text(path, canonical_dump(problem_to_json(p))); }

inline CMatrix subspace_columns(const Problem& p) {
  CMatrix b(p.d1 * p.d2, static_cast<Eigen::Index>(p.subspace.size()));
  for (std::size_t i = 0; i < p.subspace.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = p.subspace[i];
  return b;
}

}  // namespace qstrassen::cli
