#include "rpmd/forcefield.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rpmd/errors.hpp"
#include "rpmd/periodic.hpp"

namespace rpmd {
namespace {

constexpr double kMinDistance = 1e-6;

SwitchValue part_weight(double r, const ForceFieldSpec& spec, PotentialPart part) {
  SwitchValue base;
  if (spec.truncation_mode == TruncationMode::cutoff) {
    base = switch_function(r, spec.r_cut, spec.delta_r);
  }
  if (part == PotentialPart::full) return base;

  const SwitchValue zero{0.0, 0.0};
  if (spec.nonsmooth_split_radius > 0.0) {
    const bool inner = r <= spec.nonsmooth_split_radius;
    if (part == PotentialPart::fast) return inner ? base : zero;
    return inner ? zero : base;
  }
  if (!spec.split_enabled) return part == PotentialPart::fast ? base : zero;

  const SwitchValue s = switch_function(r, spec.r_cut, spec.delta_r);
  if (part == PotentialPart::fast) {
    return {base.value * s.value, base.derivative * s.value + base.value * s.derivative};
  }
  return {base.value * (1.0 - s.value),
          base.derivative * (1.0 - s.value) - base.value * s.derivative};
}

// Raw pair energy and its radial derivative.
std::pair<double, double> raw_pair(double r, PairKind kind, double charge_product,
                                   const ForceFieldSpec& spec) {
  if (kind == PairKind::coulomb) {
    const double e = charge_product / r;
    return {e, -e / r};
  }
  const double inv2 = 1.0 / (r * r);
  const double inv6 = inv2 * inv2 * inv2;
  const double rep = spec.lj_a * inv6 * inv6;
  const double att = spec.lj_b * inv6;
  return {rep - att, (-12.0 * rep + 6.0 * att) / r};
}

}  // namespace

void ForceFieldSpec::validate() const {
  if (!(lj_a > 0.0)) throw ValidationError("lj_a must be positive");
  if (!(lj_b > 0.0)) throw ValidationError("lj_b must be positive");
  if (!(r_cut > 0.0)) throw ValidationError("r_cut must be positive");
  if (!(delta_r > 0.0 && delta_r <= r_cut)) {
    throw ValidationError("delta_r must satisfy 0 < delta_r <= r_cut");
  }
  if (nonsmooth_split_radius < 0.0) throw ValidationError("nonsmooth_split_radius must be >= 0");
}

SwitchValue switch_function(double r, double r_cut, double delta_r) {
  const double inner = r_cut - delta_r;
  if (r < inner) return {1.0, 0.0};
  if (r > r_cut) return {0.0, 0.0};
  const double big_r = (r - inner) / delta_r;
  return {1.0 + big_r * big_r * (2.0 * big_r - 3.0), 6.0 * big_r * (big_r - 1.0) / delta_r};
}

PairResult pair_energy_force(const Eigen::Vector3d& r_vec, PairKind kind, double charge_product,
                             const ForceFieldSpec& spec, PotentialPart part) {
  const double r = r_vec.norm();
  if (!(r >= kMinDistance)) {
    throw SingularityError("pair distance " + std::to_string(r) + " below 1e-6");
  }
  const SwitchValue w = part_weight(r, spec, part);
  const auto [e, de] = raw_pair(r, kind, charge_product, spec);
  PairResult out;
  out.energy = e * w.value;
  const double dedr = de * w.value + e * w.derivative;
  out.force = (-dedr / r) * r_vec;
  return out;
}

ForceField::ForceField(Topology topology, ForceFieldSpec spec)
    : topology_(std::move(topology)), spec_(spec) {
  topology_.validate();
  spec_.validate();
  for (const auto& c : topology_.constraint_pairs) reach_ += c.length;
}

double ForceField::evaluate(const Eigen::MatrixXd& positions, PotentialPart part,
                            Eigen::MatrixXd* forces) const {
  const int n_mol = topology_.n_molecules;
  const int spm = topology_.sites_per_molecule;
  const int beads = static_cast<int>(positions.cols());
  const double edge = topology_.cell_edge;
  const auto mode = spec_.truncation_mode;
  const bool periodic = mode != TruncationMode::none;
  const int span = periodic ? 1 : 0;
  const double prefilter = spec_.r_cut + 2.0 * reach_;
  const auto& q = topology_.site_charges;

  if (forces) forces->setZero(positions.rows(), beads);
  double total = 0.0;

  for (int k = 0; k < beads; ++k) {
    const auto x = positions.col(k);
    for (int i = 0; i < n_mol; ++i) {
      for (int j = periodic ? i : i + 1; j < n_mol; ++j) {
        const bool self = (i == j);
        const double scale = self ? 0.5 : 1.0;
        const int oi = topology_.site_index(i, 0);
        const int oj = topology_.site_index(j, 0);
        const Eigen::Vector3d d_oo = x.segment<3>(3 * oi) - x.segment<3>(3 * oj);
        Eigen::Vector3d shift0 = Eigen::Vector3d::Zero();
        if (mode == TruncationMode::cutoff) shift0 = minimum_image(d_oo, edge) - d_oo;

        for (int nx = -span; nx <= span; ++nx) {
          for (int ny = -span; ny <= span; ++ny) {
            for (int nz = -span; nz <= span; ++nz) {
              if (self && nx == 0 && ny == 0 && nz == 0) continue;
              const Eigen::Vector3d shift = shift0 + edge * Eigen::Vector3d(nx, ny, nz);
              if (mode == TruncationMode::cutoff && (d_oo + shift).norm() > prefilter) continue;

              for (int a = 0; a < spm; ++a) {
                const int ga = topology_.site_index(i, a);
                for (int b = 0; b < spm; ++b) {
                  const int gb = topology_.site_index(j, b);
                  const Eigen::Vector3d r_vec = x.segment<3>(3 * ga) - x.segment<3>(3 * gb) + shift;
                  const double r = r_vec.norm();
                  if (!(r >= kMinDistance)) {
                    throw SingularityError("overlapping sites: molecule " + std::to_string(i) +
                                           " site " + std::to_string(a) + " and molecule " +
                                           std::to_string(j) + " site " + std::to_string(b) +
                                           " at bead " + std::to_string(k));
                  }
                  if (mode == TruncationMode::cutoff && r >= spec_.r_cut) continue;
                  const SwitchValue w = part_weight(r, spec_, part);
                  if (w.value == 0.0 && w.derivative == 0.0) continue;

                  double e = 0.0, de = 0.0;
                  const double qq = q[a] * q[b];
                  if (qq != 0.0) {
                    const auto [ec, dc] = raw_pair(r, PairKind::coulomb, qq, spec_);
                    e += ec;
                    de += dc;
                  }
                  if (a == 0 && b == 0) {
                    const auto [el, dl] = raw_pair(r, PairKind::lennard_jones, 0.0, spec_);
                    e += el;
                    de += dl;
                  }
                  total += scale * e * w.value;
                  if (forces) {
                    const double dedr = de * w.value + e * w.derivative;
                    const Eigen::Vector3d f = (-scale * dedr / r) * r_vec;
                    forces->col(k).segment<3>(3 * ga) += f;
                    forces->col(k).segment<3>(3 * gb) -= f;
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return total;
}

}  // namespace rpmd
