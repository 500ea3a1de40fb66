#include "rpmd/topology.hpp"

#include <cmath>
#include <numbers>

#include "rpmd/errors.hpp"

namespace rpmd {

std::string_view to_string(TruncationMode mode) {
  switch (mode) {
    case TruncationMode::none:
      return "none";
    case TruncationMode::nearest_image:
      return "nearest_image";
    case TruncationMode::cutoff:
      return "cutoff";
  }
  return "none";
}

TruncationMode truncation_mode_from_string(std::string_view name) {
  if (name == "none") return TruncationMode::none;
  if (name == "nearest_image") return TruncationMode::nearest_image;
  if (name == "cutoff") return TruncationMode::cutoff;
  throw ValidationError("unknown truncation mode '" + std::string(name) + "'");
}

Eigen::VectorXd Topology::dof_masses() const {
  Eigen::VectorXd masses(n_dof());
  for (int mol = 0; mol < n_molecules; ++mol) {
    for (int s = 0; s < sites_per_molecule; ++s) {
      masses.segment<3>(3 * site_index(mol, s)).setConstant(site_masses[s]);
    }
  }
  return masses;
}

void Topology::validate() const {
  if (n_molecules < 1) throw ValidationError("n_molecules must be >= 1");
  if (sites_per_molecule < 1) throw ValidationError("sites_per_molecule must be >= 1");
  if (static_cast<int>(site_masses.size()) != sites_per_molecule) {
    throw ValidationError("site_masses must have one entry per site");
  }
  if (static_cast<int>(site_charges.size()) != sites_per_molecule) {
    throw ValidationError("site_charges must have one entry per site");
  }
  for (double m : site_masses) {
    if (!(m > 0.0)) throw ValidationError("site_masses must be positive");
  }
  if (!(cell_edge > 0.0)) throw ValidationError("cell_edge must be positive");
  for (const auto& c : constraint_pairs) {
    if (c.site_a < 0 || c.site_a >= sites_per_molecule || c.site_b < 0 ||
        c.site_b >= sites_per_molecule) {
      throw ValidationError("constraint_pairs: site index out of range");
    }
    if (c.site_a == c.site_b) throw ValidationError("constraint_pairs: sites must be distinct");
    if (!(c.length > 0.0)) throw ValidationError("constraint_pairs: target_length must be positive");
  }
}

double hh_distance(const WaterGeometry& geometry) {
  const double half_angle = 0.5 * geometry.angle_hoh * std::numbers::pi / 180.0;
  return 2.0 * geometry.r_oh * std::sin(half_angle);
}

Topology build_water_topology(int n_molecules, double cell_edge, const WaterGeometry& geometry,
                              const WaterSiteParams& params, TruncationMode mode) {
  if (n_molecules < 1) throw ValidationError("n_molecules must be >= 1");
  if (!(cell_edge > 0.0)) throw ValidationError("cell_edge must be positive");
  if (!(geometry.r_oh > 0.0)) throw ValidationError("r_oh must be positive");
  if (!(geometry.angle_hoh > 0.0 && geometry.angle_hoh < 180.0 + 1e-12)) {
    throw ValidationError("angle_hoh must lie in (0, 180] degrees");
  }
  if (!(params.mass_o > 0.0)) throw ValidationError("mass_o must be positive");
  if (!(params.mass_h > 0.0)) throw ValidationError("mass_h must be positive");

  Topology topo;
  topo.n_molecules = n_molecules;
  topo.sites_per_molecule = 3;
  topo.site_masses = {params.mass_o, params.mass_h, params.mass_h};
  topo.site_charges = {params.charge_o, params.charge_h, params.charge_h};
  const double l_hh = hh_distance(geometry);
  topo.constraint_pairs = {{0, 1, geometry.r_oh}, {1, 2, l_hh}, {2, 0, geometry.r_oh}};
  topo.cell_edge = cell_edge;
  topo.truncation_mode = mode;
  return topo;
}

}  // namespace rpmd
