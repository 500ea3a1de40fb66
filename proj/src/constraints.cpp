#include "rpmd/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "rpmd/errors.hpp"

namespace rpmd {
namespace {

constexpr double kMinRcond = 1e-13;

Eigen::Vector3d site_at(const Eigen::MatrixXd& m, int site, int bead) {
  return m.col(bead).segment<3>(3 * site);
}

// +1 if site is the first member of the pair, -1 if second, 0 otherwise.
int incidence(int site, const ConstraintPair& c) {
  if (site == c.site_a) return 1;
  if (site == c.site_b) return -1;
  return 0;
}

// Change of r_c per unit momentum impulse along grad g_c' (mass-weighted incidence).
double coupling(const ConstraintPair& c, const ConstraintPair& other,
                const std::vector<double>& site_masses) {
  return incidence(c.site_a, other) / site_masses[c.site_a] -
         incidence(c.site_b, other) / site_masses[c.site_b];
}

// P x 3 matrix of bond vectors r_a - r_b for one constraint of one molecule.
Eigen::MatrixX3d bond_vectors(const Eigen::MatrixXd& x, int base_site, const ConstraintPair& c) {
  const int beads = static_cast<int>(x.cols());
  Eigen::MatrixX3d r(beads, 3);
  const int ra = 3 * (base_site + c.site_a);
  const int rb = 3 * (base_site + c.site_b);
  for (int k = 0; k < beads; ++k) {
    for (int s = 0; s < 3; ++s) r(k, s) = x(ra + s, k) - x(rb + s, k);
  }
  return r;
}

}  // namespace

void SolveReport::absorb(const SolveReport& other) {
  iterations = std::max(iterations, other.iterations);
  max_residual = std::max(max_residual, other.max_residual);
  converged = converged && other.converged;
}

double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd residual_g(const Eigen::MatrixXd& positions, const Topology& topology) {
  const int nc = static_cast<int>(topology.constraint_pairs.size());
  const int beads = static_cast<int>(positions.cols());
  Eigen::MatrixXd res(topology.n_molecules * nc, beads);
  for (int mol = 0; mol < topology.n_molecules; ++mol) {
    const int base = topology.site_index(mol, 0);
    for (int c = 0; c < nc; ++c) {
      const auto& pair = topology.constraint_pairs[c];
      const double l2 = pair.length * pair.length;
      for (int k = 0; k < beads; ++k) {
        const Eigen::Vector3d r =
            site_at(positions, base + pair.site_a, k) - site_at(positions, base + pair.site_b, k);
        res(mol * nc + c, k) = r.squaredNorm() - l2;
      }
    }
  }
  return res;
}

Eigen::MatrixXd residual_f(const Eigen::MatrixXd& positions, const Eigen::MatrixXd& momenta,
                           const Topology& topology) {
  const int nc = static_cast<int>(topology.constraint_pairs.size());
  const int beads = static_cast<int>(positions.cols());
  Eigen::MatrixXd res(topology.n_molecules * nc, beads);
  for (int mol = 0; mol < topology.n_molecules; ++mol) {
    const int base = topology.site_index(mol, 0);
    for (int c = 0; c < nc; ++c) {
      const auto& pair = topology.constraint_pairs[c];
      const double ma = topology.site_masses[pair.site_a];
      const double mb = topology.site_masses[pair.site_b];
      for (int k = 0; k < beads; ++k) {
        const int a = base + pair.site_a;
        const int b = base + pair.site_b;
        const Eigen::Vector3d r = site_at(positions, a, k) - site_at(positions, b, k);
        const Eigen::Vector3d v = site_at(momenta, a, k) / ma - site_at(momenta, b, k) / mb;
        res(mol * nc + c, k) = v.dot(r);
      }
    }
  }
  return res;
}

PositionSolveResult solve_position_multipliers(const Eigen::MatrixXd& reference_positions,
                                               const Eigen::MatrixXd& trial_positions,
                                               const Eigen::MatrixXd& bhat, double kick_scale,
                                               const Topology& topology,
                                               const ConstraintOptions& options) {
  const auto& pairs = topology.constraint_pairs;
  const int nc = static_cast<int>(pairs.size());
  const int beads = static_cast<int>(trial_positions.cols());
  const int spm = topology.sites_per_molecule;

  PositionSolveResult out;
  out.positions = trial_positions;
  out.multipliers = Eigen::MatrixXd::Zero(topology.n_molecules * nc, beads);
  out.impulse = Eigen::MatrixXd::Zero(trial_positions.rows(), beads);
  if (nc == 0) return out;

  const int dim = nc * beads;
  std::vector<Eigen::MatrixX3d> ref(nc), cur(nc);
  Eigen::MatrixXd system(dim, dim);
  Eigen::VectorXd residual(dim), lambda(dim);

  for (int mol = 0; mol < topology.n_molecules; ++mol) {
    const int base = topology.site_index(mol, 0);
    for (int c = 0; c < nc; ++c) ref[c] = bond_vectors(reference_positions, base, pairs[c]);
    lambda.setZero();

    SolveReport report;
    for (int iter = 0;; ++iter) {
      double worst = 0.0;
      for (int c = 0; c < nc; ++c) {
        cur[c] = bond_vectors(out.positions, base, pairs[c]);
        const double l2 = pairs[c].length * pairs[c].length;
        for (int k = 0; k < beads; ++k) {
          const double r = cur[c].row(k).squaredNorm() - l2;
          residual[c * beads + k] = r;
          worst = std::max(worst, std::abs(r));
        }
      }
      report.iterations = iter;
      report.max_residual = worst;
      if (!std::isfinite(worst)) {
        throw ConvergenceError("constraint non-convergence: non-finite residual in molecule " +
                                   std::to_string(mol),
                               worst, iter);
      }
      if (worst < options.tol_g) break;
      if (iter >= options.max_iter) {
        throw ConvergenceError("constraint non-convergence: molecule " + std::to_string(mol) +
                                   " residual " + std::to_string(worst) + " after " +
                                   std::to_string(iter) + " iterations",
                               worst, iter);
      }

      for (int c = 0; c < nc; ++c) {
        for (int c2 = 0; c2 < nc; ++c2) {
          const double kappa = coupling(pairs[c], pairs[c2], topology.site_masses);
          auto block = system.block(c * beads, c2 * beads, beads, beads);
          if (kappa == 0.0) {
            block.setZero();
            continue;
          }
          block = (-4.0 * kick_scale * kappa) *
                  bhat.cwiseProduct(cur[c] * ref[c2].transpose());
        }
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
      if (!(lu.rcond() > kMinRcond)) {
        throw ConvergenceError("constraint non-convergence: singular constraint system in molecule " +
                                   std::to_string(mol),
                               worst, iter);
      }
      const Eigen::VectorXd step = lu.solve(-residual);
      lambda += step;

      for (int site = 0; site < spm; ++site) {
        Eigen::Matrix3Xd dp = Eigen::Matrix3Xd::Zero(3, beads);
        for (int c = 0; c < nc; ++c) {
          const int sign = incidence(site, pairs[c]);
          if (sign == 0) continue;
          for (int k = 0; k < beads; ++k) {
            dp.col(k) -= (2.0 * kick_scale * sign * step[c * beads + k]) * ref[c].row(k).transpose();
          }
        }
        out.positions.middleRows(3 * (base + site), 3) +=
            (1.0 / topology.site_masses[site]) * dp * bhat;
      }
    }

    for (int c = 0; c < nc; ++c) {
      out.multipliers.row(mol * nc + c) = lambda.segment(c * beads, beads).transpose();
    }
    for (int site = 0; site < spm; ++site) {
      auto dp = out.impulse.middleRows(3 * (base + site), 3);
      for (int c = 0; c < nc; ++c) {
        const int sign = incidence(site, pairs[c]);
        if (sign == 0) continue;
        for (int k = 0; k < beads; ++k) {
          dp.col(k) -= (2.0 * kick_scale * sign * lambda[c * beads + k]) * ref[c].row(k).transpose();
        }
      }
    }
    out.report.absorb(report);
  }
  return out;
}

PositionSolveResult solve_position_multipliers(const Eigen::MatrixXd& reference_positions,
                                               const Eigen::MatrixXd& trial_positions,
                                               const PropagatorCache& cache,
                                               const Topology& topology,
                                               const ConstraintOptions& options) {
  return solve_position_multipliers(reference_positions, trial_positions, cache.Bhat,
                                    0.5 * cache.h, topology, options);
}

VelocitySolveResult solve_velocity_multipliers(const Eigen::MatrixXd& positions,
                                               const Eigen::MatrixXd& momenta, double kick_scale,
                                               const Topology& topology,
                                               const ConstraintOptions& options) {
  (void)options;
  const auto& pairs = topology.constraint_pairs;
  const int nc = static_cast<int>(pairs.size());
  const int beads = static_cast<int>(positions.cols());
  const int spm = topology.sites_per_molecule;

  VelocitySolveResult out;
  out.momenta = momenta;
  out.multipliers = Eigen::MatrixXd::Zero(topology.n_molecules * nc, beads);
  if (nc == 0) return out;

  std::vector<Eigen::Vector3d> r(nc);
  Eigen::MatrixXd system(nc, nc);
  Eigen::VectorXd rhs(nc);
  for (int mol = 0; mol < topology.n_molecules; ++mol) {
    const int base = topology.site_index(mol, 0);
    for (int k = 0; k < beads; ++k) {
      for (int c = 0; c < nc; ++c) {
        const auto& pair = pairs[c];
        const int a = base + pair.site_a;
        const int b = base + pair.site_b;
        r[c] = site_at(positions, a, k) - site_at(positions, b, k);
        const Eigen::Vector3d v = site_at(momenta, a, k) / topology.site_masses[pair.site_a] -
                                  site_at(momenta, b, k) / topology.site_masses[pair.site_b];
        rhs[c] = r[c].dot(v);
      }
      for (int c = 0; c < nc; ++c) {
        for (int c2 = 0; c2 < nc; ++c2) {
          system(c, c2) = 2.0 * kick_scale * coupling(pairs[c], pairs[c2], topology.site_masses) *
                          r[c].dot(r[c2]);
        }
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
      if (!(lu.rcond() > kMinRcond)) {
        throw ConvergenceError("degenerate geometry: singular velocity constraint system in molecule " +
                                   std::to_string(mol),
                               rhs.cwiseAbs().maxCoeff(), 0);
      }
      const Eigen::VectorXd sigma = lu.solve(rhs);
      for (int c = 0; c < nc; ++c) out.multipliers(mol * nc + c, k) = sigma[c];
      for (int site = 0; site < spm; ++site) {
        Eigen::Vector3d dp = Eigen::Vector3d::Zero();
        for (int c = 0; c < nc; ++c) {
          const int sign = incidence(site, pairs[c]);
          if (sign != 0) dp -= (2.0 * kick_scale * sign * sigma[c]) * r[c];
        }
        out.momenta.col(k).segment<3>(3 * (base + site)) += dp;
      }
    }
  }
  out.report.iterations = 1;
  out.report.max_residual = max_abs(residual_f(positions, out.momenta, topology));
  out.report.converged = true;
  return out;
}

ShakeResult classic_shake(const Eigen::MatrixXd& trial_positions,
                          const Eigen::MatrixXd& reference_positions, const Topology& topology,
                          double h, const ConstraintOptions& options) {
  const auto& pairs = topology.constraint_pairs;
  const int nc = static_cast<int>(pairs.size());
  const int beads = static_cast<int>(trial_positions.cols());

  ShakeResult out;
  out.positions = trial_positions;
  out.multipliers = Eigen::MatrixXd::Zero(topology.n_molecules * nc, beads);
  if (nc == 0) return out;

  const double h2 = h * h;
  for (int sweep = 0;; ++sweep) {
    const double worst = max_abs(residual_g(out.positions, topology));
    out.report.iterations = sweep;
    out.report.max_residual = worst;
    if (!std::isfinite(worst)) {
      throw ConvergenceError("constraint non-convergence: non-finite SHAKE residual", worst, sweep);
    }
    if (worst < options.tol_g) break;
    if (sweep >= options.max_iter) {
      throw ConvergenceError("constraint non-convergence: SHAKE residual " +
                                 std::to_string(worst) + " after " + std::to_string(sweep) +
                                 " sweeps",
                             worst, sweep);
    }
    for (int mol = 0; mol < topology.n_molecules; ++mol) {
      const int base = topology.site_index(mol, 0);
      for (int k = 0; k < beads; ++k) {
        for (int c = 0; c < nc; ++c) {
          const auto& pair = pairs[c];
          const int a = base + pair.site_a;
          const int b = base + pair.site_b;
          const double inv_ma = 1.0 / topology.site_masses[pair.site_a];
          const double inv_mb = 1.0 / topology.site_masses[pair.site_b];
          const Eigen::Vector3d r = site_at(out.positions, a, k) - site_at(out.positions, b, k);
          const Eigen::Vector3d r0 =
              site_at(reference_positions, a, k) - site_at(reference_positions, b, k);
          const double diff = r.squaredNorm() - pair.length * pair.length;
          const double denom = 2.0 * (inv_ma + inv_mb) * r.dot(r0);
          if (std::abs(denom) < 1e-300) {
            throw ConvergenceError("constraint non-convergence: SHAKE bond orthogonal to reference",
                                   worst, sweep);
          }
          const double g = -diff / denom;
          out.positions.col(k).segment<3>(3 * a) += (g * inv_ma) * r0;
          out.positions.col(k).segment<3>(3 * b) -= (g * inv_mb) * r0;
          out.multipliers(mol * nc + c, k) -= g / h2;
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd classic_rattle_project(const Eigen::MatrixXd& momenta,
                                       const Eigen::MatrixXd& positions, const Topology& topology,
                                       const ConstraintOptions& options, SolveReport* report) {
  const auto& pairs = topology.constraint_pairs;
  const int nc = static_cast<int>(pairs.size());
  const int beads = static_cast<int>(positions.cols());
  Eigen::MatrixXd p = momenta;
  SolveReport local;
  if (nc > 0) {
    for (int sweep = 0;; ++sweep) {
      const double worst = max_abs(residual_f(positions, p, topology));
      local.iterations = sweep;
      local.max_residual = worst;
      if (worst < options.tol_f) break;
      if (sweep >= options.max_iter || !std::isfinite(worst)) {
        throw ConvergenceError("constraint non-convergence: RATTLE velocity residual " +
                                   std::to_string(worst),
                               worst, sweep);
      }
      for (int mol = 0; mol < topology.n_molecules; ++mol) {
        const int base = topology.site_index(mol, 0);
        for (int k = 0; k < beads; ++k) {
          for (int c = 0; c < nc; ++c) {
            const auto& pair = pairs[c];
            const int a = base + pair.site_a;
            const int b = base + pair.site_b;
            const double inv_ma = 1.0 / topology.site_masses[pair.site_a];
            const double inv_mb = 1.0 / topology.site_masses[pair.site_b];
            const Eigen::Vector3d r = site_at(positions, a, k) - site_at(positions, b, k);
            const Eigen::Vector3d v = site_at(p, a, k) * inv_ma - site_at(p, b, k) * inv_mb;
            const double g = r.dot(v) / (r.squaredNorm() * (inv_ma + inv_mb));
            p.col(k).segment<3>(3 * a) -= g * r;
            p.col(k).segment<3>(3 * b) += g * r;
          }
        }
      }
    }
  }
  if (report) *report = local;
  return p;
}

}  // namespace rpmd
