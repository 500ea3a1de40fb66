#pragma once

#include <Eigen/Core>

#include "rpmd/state.hpp"

namespace rpmd {

// Real trigonometric basis of the cyclic second-difference matrix.
//
// Column k of U holds mode k sampled on beads j = 0..P-1:
//   k = 0          : 1/sqrt(P)
//   0 < k < P/2    : sqrt(2/P) cos(2 pi j k / P)
//   k = P/2        : (-1)^j / sqrt(P)           (P even only)
//   P/2 < k < P    : sqrt(2/P) sin(2 pi j k / P)
// so the cosine partner of frequency index k precedes its sine partner P-k.
// omega[k] = 2 alpha sin(k pi / P) for every column, omega[0] = 0.
// Bead coordinates map to modes by U^T and back by U.
struct NormalModeBasis {
  int beads = 1;
  double alpha = 1.0;
  Eigen::MatrixXd U;
  Eigen::VectorXd omega;
};

NormalModeBasis build_basis(int beads, double alpha);

// Bead-space images of the diagonal free-flow and averaging operators for one step h.
// All four matrices are symmetric.
struct PropagatorCache {
  double h = 0.0;
  Eigen::MatrixXd Ahat;   // U diag{1, cos(w h)} U^T
  Eigen::MatrixXd Bhat;   // U diag{h, sin(w h)/w} U^T
  Eigen::MatrixXd Chat;   // U diag{0, -w sin(w h)} U^T
  Eigen::MatrixXd Dmoll;  // U diag{1, sinc(w h)} U^T

  int beads() const { return static_cast<int>(Ahat.rows()); }
};

PropagatorCache build_propagator(const NormalModeBasis& basis, double h);

// sin(x)/x with the removable singularity filled in.
double sinc(double x);

// Exact flow of kinetic + spring energy over cache.h:
//   x <- x Ahat + M^-1 p Bhat,  p <- M x Chat + p Ahat   (row-wise, pre-update x).
void propagate_free_inplace(Eigen::MatrixXd& positions, Eigen::MatrixXd& momenta,
                            const PropagatorCache& cache, const Eigen::VectorXd& masses);

RingPolymerState propagate_free(const RingPolymerState& state, const PropagatorCache& cache,
                                const Eigen::VectorXd& masses);

// Time-averaged positions U D(h) U^T x_j for every degree of freedom.
Eigen::MatrixXd mollify_positions(const Eigen::MatrixXd& positions, const PropagatorCache& cache);

// Bhat v for a single per-bead vector.
Eigen::VectorXd apply_bhat(const PropagatorCache& cache, const Eigen::VectorXd& per_bead);

}  // namespace rpmd
