#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace rpmd {

enum class TruncationMode { none, nearest_image, cutoff };

std::string_view to_string(TruncationMode mode);
TruncationMode truncation_mode_from_string(std::string_view name);

// Squared-distance constraint between two sites of the same molecule.
struct ConstraintPair {
  int site_a = 0;
  int site_b = 0;
  double length = 0.0;
};

// Every molecule in the system is a copy of one rigid template. Site 0 of the
// template is the Lennard-Jones centre (oxygen for water).
struct Topology {
  int n_molecules = 0;
  int sites_per_molecule = 0;
  std::vector<double> site_masses;
  std::vector<double> site_charges;
  std::vector<ConstraintPair> constraint_pairs;
  double cell_edge = 0.0;
  TruncationMode truncation_mode = TruncationMode::none;

  int n_sites() const { return n_molecules * sites_per_molecule; }
  int n_dof() const { return 3 * n_sites(); }
  int site_index(int molecule, int site) const { return molecule * sites_per_molecule + site; }

  // Mass of each Cartesian degree of freedom, ordered (site0.x, site0.y, site0.z, site1.x, ...).
  Eigen::VectorXd dof_masses() const;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

struct WaterGeometry {
  double r_oh = 1.0;
  double angle_hoh = 109.47;  // degrees
};

struct WaterSiteParams {
  double mass_o = 15.999;
  double mass_h = 1.008;
  double charge_o = -0.8476;
  double charge_h = 0.4238;
};

// H-H distance of a rigid water with the given O-H length and H-O-H angle.
double hh_distance(const WaterGeometry& geometry);

// Sites are ordered O, H1, H2; constraints form the ring O-H1, H1-H2, H2-O.
Topology build_water_topology(int n_molecules, double cell_edge, const WaterGeometry& geometry,
                              const WaterSiteParams& params = {},
                              TruncationMode mode = TruncationMode::none);

// hbar is fixed to one. alpha = P / (beta * hbar) is the ring-polymer spring frequency scale.
struct ReducedUnits {
  double hbar = 1.0;
  double beta = 1.0;

  double beta_p(int beads) const { return beta / beads; }
  double alpha(int beads) const { return beads / (beta * hbar); }
};

}  // namespace rpmd
