#include "rpmd/state.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "rpmd/constraints.hpp"
#include "rpmd/errors.hpp"
#include "rpmd/periodic.hpp"

namespace rpmd {
namespace {

constexpr double kMinSeparation = 1.5;

// Uniformly distributed rotation (Shoemake's subgroup algorithm).
Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u1 = uniform(rng), u2 = uniform(rng), u3 = uniform(rng);
  const double two_pi = 2.0 * 3.14159265358979323846;
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  Eigen::Quaterniond q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                       a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
  return q.normalized().toRotationMatrix();
}

}  // namespace

Eigen::Matrix3Xd template_geometry(const Topology& topology) {
  const int spm = topology.sites_per_molecule;
  Eigen::Matrix3Xd geom = Eigen::Matrix3Xd::Zero(3, spm);
  if (spm == 1) return geom;
  if (spm != 3 || topology.constraint_pairs.size() != 3) {
    throw ValidationError("initialization supports single-site or three-site ring molecules only");
  }
  // distance table from the three ring constraints
  Eigen::Matrix3d dist = Eigen::Matrix3d::Zero();
  for (const auto& c : topology.constraint_pairs) {
    dist(c.site_a, c.site_b) = dist(c.site_b, c.site_a) = c.length;
  }
  const double d01 = dist(0, 1), d02 = dist(0, 2), d12 = dist(1, 2);
  if (d01 <= 0.0 || d02 <= 0.0 || d12 <= 0.0) {
    throw ValidationError("three-site template needs constraints on all three site pairs");
  }
  // site 0 at the origin, site 1 and 2 symmetric about the y axis when d01 == d02
  const double cos_angle = (d01 * d01 + d02 * d02 - d12 * d12) / (2.0 * d01 * d02);
  if (cos_angle < -1.0 - 1e-12 || cos_angle > 1.0 + 1e-12) {
    throw ValidationError("constraint lengths violate the triangle inequality");
  }
  const double angle = std::acos(std::clamp(cos_angle, -1.0, 1.0));
  geom.col(1) = d01 * Eigen::Vector3d(std::sin(0.5 * angle), std::cos(0.5 * angle), 0.0);
  geom.col(2) = d02 * Eigen::Vector3d(-std::sin(0.5 * angle), std::cos(0.5 * angle), 0.0);
  return geom;
}

Eigen::MatrixXd sample_momenta(const Topology& topology, int beads, double temperature,
                               std::uint64_t seed) {
  if (beads < 1) throw ValidationError("bead count must be >= 1");
  if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  const Eigen::VectorXd masses = topology.dof_masses();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(masses.size(), beads);
  if (temperature == 0.0) return p;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < beads; ++k) {
    for (Eigen::Index j = 0; j < masses.size(); ++j) {
      p(j, k) = std::sqrt(masses[j] * beads * temperature) * normal(rng);
    }
  }
  return p;
}

void remove_linear_momentum(Eigen::MatrixXd& momenta, const Eigen::VectorXd& masses) {
  const Eigen::Index n_sites = masses.size() / 3;
  const double beads = static_cast<double>(momenta.cols());
  Eigen::Vector3d total = Eigen::Vector3d::Zero();
  double total_mass = 0.0;
  for (Eigen::Index s = 0; s < n_sites; ++s) {
    total += momenta.middleRows(3 * s, 3).rowwise().sum();
    total_mass += masses[3 * s] * beads;
  }
  const Eigen::Vector3d velocity = total / total_mass;
  for (Eigen::Index s = 0; s < n_sites; ++s) {
    momenta.middleRows(3 * s, 3).colwise() -= masses[3 * s] * velocity;
  }
}

RingPolymerState initialize_state(const Topology& topology, int beads, const ReducedUnits& units,
                                  double temperature, std::uint64_t seed) {
  topology.validate();
  if (beads < 1) throw ValidationError("bead count must be >= 1");
  if (!(units.beta > 0.0)) throw ValidationError("beta must be positive");

  const Eigen::Matrix3Xd geom = template_geometry(topology);
  const int n = topology.n_molecules;
  int per_side = 1;
  while (per_side * per_side * per_side < n) ++per_side;
  const double spacing = topology.cell_edge / per_side;

  std::mt19937_64 rng(seed);
  Eigen::Matrix3Xd anchors(3, n);
  Eigen::VectorXd single(topology.n_dof());
  for (int mol = 0; mol < n; ++mol) {
    const int ix = mol % per_side;
    const int iy = (mol / per_side) % per_side;
    const int iz = mol / (per_side * per_side);
    const Eigen::Vector3d anchor = spacing * Eigen::Vector3d(ix + 0.5, iy + 0.5, iz + 0.5);
    anchors.col(mol) = anchor;
    const Eigen::Matrix3d rot = random_rotation(rng);
    for (int s = 0; s < topology.sites_per_molecule; ++s) {
      single.segment<3>(3 * topology.site_index(mol, s)) = anchor + rot * geom.col(s);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::Vector3d d = anchors.col(i) - anchors.col(j);
      if (topology.truncation_mode != TruncationMode::none) d = minimum_image(d, topology.cell_edge);
      if (d.norm() < kMinSeparation) {
        throw ValidationError("placement error: molecules do not fit in the cell (separation " +
                              std::to_string(d.norm()) + " < 1.5)");
      }
    }
  }

  RingPolymerState state;
  state.positions = single.replicate(1, beads);
  const std::uint64_t momentum_seed = rng();
  Eigen::MatrixXd p = sample_momenta(topology, beads, temperature, momentum_seed);
  const Eigen::VectorXd masses = topology.dof_masses();
  if (!topology.constraint_pairs.empty() && temperature > 0.0) {
    p = solve_velocity_multipliers(state.positions, p, 1.0, topology, ConstraintOptions{}).momenta;
  }
  remove_linear_momentum(p, masses);
  state.momenta = std::move(p);
  state.time = 0.0;
  return state;
}

}  // namespace rpmd
