#pragma once

// Reference implementations used only by the tests. Each one is written
// independently of the library code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "rpmd/topology.hpp"

namespace oracle {

// Cyclic second-difference matrix: 2 on the diagonal, -1 to each ring neighbour.
inline Eigen::MatrixXd cyclic_laplacian(int beads) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(beads, beads);
  if (beads == 1) return l;
  for (int k = 0; k < beads; ++k) {
    l(k, k) += 2.0;
    l(k, (k + 1) % beads) -= 1.0;
    l(k, (k + beads - 1) % beads) -= 1.0;
  }
  return l;
}

// Sorted mode frequencies from a dense symmetric eigensolve of alpha^2 L.
inline std::vector<double> brute_force_omega(int beads, double alpha) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(alpha * alpha * cyclic_laplacian(beads));
  std::vector<double> w;
  for (int i = 0; i < beads; ++i) w.push_back(std::sqrt(std::max(0.0, es.eigenvalues()[i])));
  std::sort(w.begin(), w.end());
  return w;
}

// Adaptive Runge-Kutta-Fehlberg 7(8) integration of the free ring polymer
// dx/dt = p/m, dp/dt = -m alpha^2 L x, one degree of freedom at a time.
inline void ode_free_flow(Eigen::MatrixXd& x, Eigen::MatrixXd& p, const Eigen::VectorXd& masses,
                          double alpha, double t) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  const int beads = static_cast<int>(x.cols());
  const Eigen::MatrixXd lap = cyclic_laplacian(beads);
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const double m = masses[j];
    State s(2 * beads);
    for (int k = 0; k < beads; ++k) {
      s[k] = x(j, k);
      s[beads + k] = p(j, k);
    }
    auto rhs = [&](const State& y, State& dy, double) {
      for (int k = 0; k < beads; ++k) {
        dy[k] = y[beads + k] / m;
        double acc = 0.0;
        for (int q = 0; q < beads; ++q) acc += lap(k, q) * y[q];
        dy[beads + k] = -m * alpha * alpha * acc;
      }
    };
    auto stepper = ode::make_controlled(1e-15, 1e-15, ode::runge_kutta_fehlberg78<State>());
    ode::integrate_adaptive(stepper, rhs, s, 0.0, t, 1e-4);
    for (int k = 0; k < beads; ++k) {
      x(j, k) = s[k];
      p(j, k) = s[beads + k];
    }
  }
}

using Vec3 = std::array<double, 3>;

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline std::vector<Vec3> sites_of(const Eigen::MatrixXd& m, int bead) {
  std::vector<Vec3> out(m.rows() / 3);
  for (std::size_t s = 0; s < out.size(); ++s) {
    for (int d = 0; d < 3; ++d) out[s][d] = m(3 * s + d, bead);
  }
  return out;
}

inline void store(Eigen::MatrixXd& m, int bead, const std::vector<Vec3>& sites) {
  for (std::size_t s = 0; s < sites.size(); ++s) {
    for (int d = 0; d < 3; ++d) m(3 * s + d, bead) = sites[s][d];
  }
}

// Textbook SHAKE: loop over bonds, move both ends along the old bond vector.
inline Eigen::MatrixXd shake(const Eigen::MatrixXd& trial, const Eigen::MatrixXd& reference,
                             const rpmd::Topology& topo, double tol = 1e-14, int max_sweeps = 10000) {
  Eigen::MatrixXd out = trial;
  for (int bead = 0; bead < trial.cols(); ++bead) {
    auto x = sites_of(trial, bead);
    const auto x0 = sites_of(reference, bead);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      bool done = true;
      for (int mol = 0; mol < topo.n_molecules; ++mol) {
        for (const auto& c : topo.constraint_pairs) {
          const int a = topo.site_index(mol, c.site_a), b = topo.site_index(mol, c.site_b);
          const double ia = 1.0 / topo.site_masses[c.site_a], ib = 1.0 / topo.site_masses[c.site_b];
          const Vec3 r = sub(x[a], x[b]), r0 = sub(x0[a], x0[b]);
          const double diff = c.length * c.length - dot(r, r);
          if (std::abs(diff) > tol) done = false;
          const double g = diff / (2.0 * (ia + ib) * dot(r, r0));
          for (int d = 0; d < 3; ++d) {
            x[a][d] += g * ia * r0[d];
            x[b][d] -= g * ib * r0[d];
          }
        }
      }
      if (done) break;
    }
    store(out, bead, x);
  }
  return out;
}

// Textbook RATTLE velocity stage, bond by bond, on momenta.
inline Eigen::MatrixXd rattle_velocities(const Eigen::MatrixXd& momenta,
                                         const Eigen::MatrixXd& positions,
                                         const rpmd::Topology& topo, double tol = 1e-15,
                                         int max_sweeps = 5000) {
  Eigen::MatrixXd out = momenta;
  for (int bead = 0; bead < momenta.cols(); ++bead) {
    auto p = sites_of(momenta, bead);
    const auto x = sites_of(positions, bead);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      bool done = true;
      for (int mol = 0; mol < topo.n_molecules; ++mol) {
        for (const auto& c : topo.constraint_pairs) {
          const int a = topo.site_index(mol, c.site_a), b = topo.site_index(mol, c.site_b);
          const double ia = 1.0 / topo.site_masses[c.site_a], ib = 1.0 / topo.site_masses[c.site_b];
          const Vec3 r = sub(x[a], x[b]);
          Vec3 v;
          for (int d = 0; d < 3; ++d) v[d] = p[a][d] * ia - p[b][d] * ib;
          const double rv = dot(r, v);
          if (std::abs(rv) > tol) done = false;
          const double k = rv / ((ia + ib) * dot(r, r));
          for (int d = 0; d < 3; ++d) {
            p[a][d] -= k * r[d];
            p[b][d] += k * r[d];
          }
        }
      }
      if (done) break;
    }
    store(out, bead, p);
  }
  return out;
}

}  // namespace oracle
