#pragma once

#include <Eigen/Core>

#include "rpmd/normal_modes.hpp"
#include "rpmd/topology.hpp"

namespace rpmd {

struct ConstraintOptions {
  double tol_g = 1e-10;  // squared-length units
  double tol_f = 1e-10;
  int max_iter = 100;
};

struct SolveReport {
  int iterations = 0;
  double max_residual = 0.0;
  bool converged = true;

  // Worst-case merge, for aggregating over molecules or inner steps.
  void absorb(const SolveReport& other);
};

// Residual matrices are laid out with one row per (molecule, constraint) pair,
// row = molecule * n_constraints + c, and one column per bead.

// |r_a - r_b|^2 - l^2 for every constraint and bead. No periodic wrapping.
Eigen::MatrixXd residual_g(const Eigen::MatrixXd& positions, const Topology& topology);

// (v_a - v_b) . (r_a - r_b) with v = p / m.
Eigen::MatrixXd residual_f(const Eigen::MatrixXd& positions, const Eigen::MatrixXd& momenta,
                           const Topology& topology);

double max_abs(const Eigen::MatrixXd& m);

// Multiplier convention shared by every solver below. The constraint impulse on
// the momenta is  dp = -kick_scale * sum_c lambda_c grad g_c,  with
// g_c = |r_a - r_b|^2 - l^2 evaluated at the reference positions, and it moves
// the positions by  dx_j = (1/m_j) Bhat dp_j  across beads.

struct PositionSolveResult {
  Eigen::MatrixXd positions;    // corrected positions
  Eigen::MatrixXd multipliers;  // Lambda_c, residual layout
  Eigen::MatrixXd impulse;      // dp to add to the momenta that produced the trial positions
  SolveReport report;
};

// Normal-mode SHAKE. For each molecule, iterates the linearised 3P x 3P
// (n_constraints * P in general) system whose blocks are
//   diag(r~_c) Bhat diag(r_c') * (-4 kick_scale kappa(c, c'))
// where kappa couples constraints through shared sites (1/m_a + 1/m_b on the
// diagonal), solving by partial-pivot LU until every |r~|^2 - l^2 < tol_g.
// Throws ConvergenceError on a singular system or after max_iter solves.
PositionSolveResult solve_position_multipliers(const Eigen::MatrixXd& reference_positions,
                                               const Eigen::MatrixXd& trial_positions,
                                               const Eigen::MatrixXd& bhat, double kick_scale,
                                               const Topology& topology,
                                               const ConstraintOptions& options);

// Uses cache.Bhat and kick_scale = cache.h / 2 (one half-kick before free flight).
PositionSolveResult solve_position_multipliers(const Eigen::MatrixXd& reference_positions,
                                               const Eigen::MatrixXd& trial_positions,
                                               const PropagatorCache& cache,
                                               const Topology& topology,
                                               const ConstraintOptions& options);

struct VelocitySolveResult {
  Eigen::MatrixXd momenta;
  Eigen::MatrixXd multipliers;  // Lambda_cv, residual layout
  SolveReport report;
};

// Direct solve of the velocity multipliers with gradients at the given
// positions. Beads decouple, so each bead contributes one dense
// n_constraints x n_constraints block. Throws ConvergenceError if singular.
VelocitySolveResult solve_velocity_multipliers(const Eigen::MatrixXd& positions,
                                               const Eigen::MatrixXd& momenta, double kick_scale,
                                               const Topology& topology,
                                               const ConstraintOptions& options);

struct ShakeResult {
  Eigen::MatrixXd positions;
  Eigen::MatrixXd multipliers;  // same convention as above with Bhat = h, kick_scale = h/2
  SolveReport report;
};

// Per-bead Gauss-Seidel SHAKE with h^2 coupling. Iterates sweeps until every
// residual is below tol_g; throws ConvergenceError after max_iter sweeps.
ShakeResult classic_shake(const Eigen::MatrixXd& trial_positions,
                          const Eigen::MatrixXd& reference_positions, const Topology& topology,
                          double h, const ConstraintOptions& options);

// Per-bead Gauss-Seidel RATTLE velocity projection onto the constraint tangent space.
Eigen::MatrixXd classic_rattle_project(const Eigen::MatrixXd& momenta,
                                       const Eigen::MatrixXd& positions, const Topology& topology,
                                       const ConstraintOptions& options,
                                       SolveReport* report = nullptr);

}  // namespace rpmd
