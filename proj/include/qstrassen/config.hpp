#pragma once

namespace qstrassen {

/// Numerical tolerances shared by the kernels. Every operation that compares
/// against a tolerance takes one of these, so callers can tighten or loosen
/// them per call.
struct ToleranceConfig {
  double hermitize = 1e-12;       ///< allowed |H - H*| before symmetrization
  double psd_floor = 1e-10;       ///< eigenvalues above -psd_floor count as PSD
  double reconstruction = 1e-9;   ///< relative decomposition residual
  double support = 1e-10;         ///< relative eigenvalue cutoff for supports
  double orthonormal = 1e-10;     ///< Gram matrix deviation from identity
  double magnitude_guard = 1e150; ///< entries above this are rejected
};

/// Settings for the splitting solver and the decision procedures built on it.
struct SolverConfig {
  double gap_tol = 1e-6;        ///< certified duality gap needed for `optimal`
  double eps_decision = 1e-4;   ///< coupling declared when value >= 1 - eps
  int max_iters = 50000;
  double penalty_init = 10.0;
  double balance_ratio = 10.0;  ///< residual ratio that triggers a penalty update
  double balance_factor = 2.0;
  int balance_every = 100;      ///< iterations between penalty updates
  int check_every = 10;         ///< iterations between certificate evaluations
  double relaxation = 1.0;      ///< over-relaxation factor in (0, 2)
  bool warm_start = true;
};

}  // namespace qstrassen
