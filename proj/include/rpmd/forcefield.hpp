#pragma once

#include <Eigen/Core>

#include "rpmd/topology.hpp"

namespace rpmd {

enum class PairKind { coulomb, lennard_jones };
enum class PotentialPart { full, fast, slow };

// SPC/E intermolecular parameters. Coulomb energies use the bare product
// Q Q' / r (no 1/(4 pi eps0) prefactor); Lennard-Jones acts between site 0 of
// each molecule only.
//
// The switch S(r) with (r_cut, delta_r) partitions every site-pair term into
// a fast part V S and a slow part V (1 - S). In cutoff mode the interaction
// itself is first tapered to V S, so full = V S, fast = V S^2 and
// slow = V S (1 - S), all vanishing at r_cut. A positive
// nonsmooth_split_radius r_h replaces the split with the indicator pair
// fast = full 1[r <= r_h], slow = full 1[r > r_h].
struct ForceFieldSpec {
  double lj_a = 2.633e6;
  double lj_b = 2.617e3;
  double r_cut = 8.0;
  double delta_r = 4.5;
  bool split_enabled = true;
  TruncationMode truncation_mode = TruncationMode::none;
  double nonsmooth_split_radius = 0.0;

  void validate() const;
};

struct SwitchValue {
  double value = 1.0;
  double derivative = 0.0;
};

// 1 below r_cut - delta_r, 1 + R^2 (2R - 3) on the healing interval with
// R = (r - (r_cut - delta_r)) / delta_r, 0 beyond r_cut. C1 at both ends.
SwitchValue switch_function(double r, double r_cut, double delta_r);

struct PairResult {
  double energy = 0.0;
  Eigen::Vector3d force = Eigen::Vector3d::Zero();  // on the site at the head of r_vec
};

// r_vec = r_i - r_j. Throws SingularityError for |r_vec| below 1e-6.
PairResult pair_energy_force(const Eigen::Vector3d& r_vec, PairKind kind, double charge_product,
                             const ForceFieldSpec& spec, PotentialPart part);

// Per-replica SPC/E potential: bead k of a molecule interacts only with bead k
// of the other molecules; intramolecular pairs are excluded.
//
// Image handling by truncation mode:
//   none          - the bare pair, no periodic images
//   nearest_image - the pair plus its 26 images in the neighbouring cells,
//                   taken on the unwrapped displacement so the sum is smooth in time
//   cutoff        - images around the O-O minimum image, every site pair tapered
//                   to zero at r_cut
// In both periodic modes a molecule also sees its own images at half weight.
class ForceField {
 public:
  ForceField(Topology topology, ForceFieldSpec spec);

  // Total energy summed over beads. When forces is non-null it is resized to
  // the shape of positions and overwritten with -grad.
  double evaluate(const Eigen::MatrixXd& positions, PotentialPart part,
                  Eigen::MatrixXd* forces) const;

  double energy(const Eigen::MatrixXd& positions,
                PotentialPart part = PotentialPart::full) const {
    return evaluate(positions, part, nullptr);
  }

  const Topology& topology() const { return topology_; }
  const ForceFieldSpec& spec() const { return spec_; }

 private:
  Topology topology_;
  ForceFieldSpec spec_;
  double reach_ = 0.0;  // upper bound on any intramolecular site distance
};

}  // namespace rpmd
