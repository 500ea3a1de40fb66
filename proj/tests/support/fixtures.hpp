#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "rpmd/integrators.hpp"
#include "rpmd/state.hpp"
#include "rpmd/topology.hpp"

namespace fixture {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return g(rng); });
}

// Unconstrained point particles with one site per molecule and no charges.
inline rpmd::Topology point_particles(int n, double mass = 1.0) {
  rpmd::Topology t;
  t.n_molecules = n;
  t.sites_per_molecule = 1;
  t.site_masses = {mass};
  t.site_charges = {0.0};
  t.cell_edge = 10.0;
  return t;
}

// Rigid water state with every bead displaced by up to `jitter` per component.
inline rpmd::RingPolymerState jittered_water(const rpmd::Topology& topo, int beads,
                                             std::uint64_t seed, double jitter,
                                             double temperature = 1.0) {
  rpmd::RingPolymerState s = rpmd::initialize_state(topo, beads, {}, temperature, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  s.positions += Eigen::MatrixXd::NullaryExpr(s.positions.rows(), s.positions.cols(),
                                              [&] { return u(rng); });
  return s;
}

// V = sum over dofs and beads of (k/2) x^2 + (c/4) x^4.
inline rpmd::ForceProvider anharmonic(double k, double c) {
  return [k, c](const Eigen::MatrixXd& x, Eigen::MatrixXd& f) {
    f = -(k * x.array() + c * x.array().cube()).matrix();
    return (0.5 * k * x.array().square() + 0.25 * c * x.array().pow(4)).sum();
  };
}

}  // namespace fixture
