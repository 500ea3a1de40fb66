#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "rpmd/topology.hpp"

namespace rpmd {

// Phase-space point of the ring polymer. Rows are Cartesian degrees of freedom
// (site-major, xyz-minor), columns are beads.
struct RingPolymerState {
  Eigen::MatrixXd positions;
  Eigen::MatrixXd momenta;
  double time = 0.0;

  int beads() const { return static_cast<int>(positions.cols()); }
  int n_dof() const { return static_cast<int>(positions.rows()); }
  bool all_finite() const { return positions.allFinite() && momenta.allFinite(); }
};

// Rigid-template coordinates of one molecule, relative to site 0. Supports
// single-site templates and three-site templates whose constraints close a ring.
Eigen::Matrix3Xd template_geometry(const Topology& topology);

// Independent zero-mean Gaussian momenta with variance m_j * P * temperature for
// every degree of freedom and bead. No constraint projection.
Eigen::MatrixXd sample_momenta(const Topology& topology, int beads, double temperature,
                               std::uint64_t seed);

// Subtracts the mass-weighted mean velocity over all sites and beads.
void remove_linear_momentum(Eigen::MatrixXd& momenta, const Eigen::VectorXd& masses);

// Places molecules on a cubic sub-lattice of the cell with seeded random
// orientations, collapses every bead of a site to one point, samples momenta,
// projects them onto the velocity constraints and removes the net momentum.
// Deterministic for a fixed seed. Throws ValidationError when the molecules
// cannot be placed with an O-O distance of at least 1.5.
RingPolymerState initialize_state(const Topology& topology, int beads, const ReducedUnits& units,
                                  double temperature, std::uint64_t seed);

}  // namespace rpmd
