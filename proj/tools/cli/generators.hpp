#pragma once

// `qstrassen gen`: problem files built from the random instances in
// qstrassen/instances.hpp. Infeasible variants mix rho1 with an independent
// state.

#include <cstdint>
#include <string>
#include <vector>

#include "cli/problem_file.hpp"
#include "qstrassen/instances.hpp"

namespace qstrassen::cli {

struct GenSpec {
  ProblemKind kind = ProblemKind::Coupling;
  Eigen::Index d1 = 2;
  Eigen::Index d2 = 2;
  bool feasible = true;
  std::uint64_t seed = 0;
  double decay = 0.5;            ///< sdp_ladder spectral ratio
  double mix = 0.2;              ///< infeasible mixing weight
  Eigen::Index subspace_dim = 0; ///< 0: pick a default for the kind
};

inline std::vector<CVector> columns_of(const CMatrix& m) {
  std::vector<CVector> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m.col(j));
  return out;
}

inline Problem generate_instance(const GenSpec& g) {
  if (g.d1 < 1 || g.d2 < 1) throw DimensionError("gen: dims must be positive");
  if (!(g.mix > 0.0 && g.mix < 1.0)) throw InvariantError("mixing weight in (0, 1)", g.mix);
  Rng rng(g.seed);
  Problem p;
  p.kind = g.kind;
  p.d1 = g.d1;
  p.d2 = g.d2;
  p.seed = g.seed;
  p.metadata = {{"generator", "qstrassen gen"}, {"feasible", g.feasible}};
  const Eigen::Index big = g.d1 * g.d2;

  switch (g.kind) {
    case ProblemKind::Coupling: {
      // Small X keeps perturbed marginals outside the reachable set.
      const Eigen::Index k = g.subspace_dim > 0 ? g.subspace_dim : (g.feasible ? std::min<Eigen::Index>(big, 3) : 2);
      if (k > big) throw DimensionError("gen: subspace dimension exceeds d1*d2");
      auto c = coupled_instance(g.d1, g.d2, k, rng);
      if (!g.feasible) {
        c.rho1 = mix_with_random_state(c.rho1, g.mix, rng);
        p.metadata["mix"] = g.mix;
      }
      p.rho1 = c.rho1;
      p.rho2 = c.rho2;
      p.subspace = columns_of(c.basis);
      break;
    }
    case ProblemKind::FLadder: {
      const Eigen::Index k = g.subspace_dim > 0 ? g.subspace_dim : std::min<Eigen::Index>(big, 3);
      if (k > big) throw DimensionError("gen: subspace dimension exceeds d1*d2");
      auto c = coupled_instance(g.d1, g.d2, k, rng);
      if (!g.feasible) {
        c.rho1 = mix_with_random_state(c.rho1, g.mix, rng);
        p.metadata["mix"] = g.mix;
      }
      p.rho1 = c.rho1;
      p.rho2 = c.rho2;
      p.subspace = columns_of(complete_basis(c.basis, rng));
      p.metadata["support_dim"] = k;
      break;
    }
    case ProblemKind::SdpLadder: {
      if (g.d1 != g.d2) throw DimensionError("gen: sdp_ladder instances are square (d1 = d2)");
      const Eigen::Index comps = g.subspace_dim > 1 ? g.subspace_dim - 1 : 2;
      auto c = geometric_instance(g.d1, g.decay, comps, rng);
      if (!g.feasible) {
        c.rho1 = mix_with_random_state(c.rho1, g.mix, rng);
        p.metadata["mix"] = g.mix;
      }
      p.rho1 = c.rho1;
      p.rho2 = c.rho2;
      p.subspace = columns_of(c.basis);
      p.metadata["decay"] = g.decay;
      break;
    }
    case ProblemKind::FiberDist: {
      p.rho1 = random_state(g.d1, g.d1, rng);
      p.rho2 = random_state(g.d2, g.d2, rng);
      p.beta = random_state(big, big, rng);
      p.sigma1 = mix_with_random_state(*p.rho1, g.mix, rng);
      p.sigma2 = *p.rho2;
      break;
    }
    case ProblemKind::Classical: {
      p.classical = random_classical_sized(static_cast<int>(g.d1), static_cast<int>(g.d2), rng);
      break;
    }
  }
  return p;
}

}  // namespace qstrassen::cli
