#include "rpmd/normal_modes.hpp"

#include <cmath>
#include <numbers>

#include "rpmd/errors.hpp"

namespace rpmd {

NormalModeBasis build_basis(int beads, double alpha) {
  if (beads < 1) throw ValidationError("bead count must be >= 1");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");

  NormalModeBasis basis;
  basis.beads = beads;
  basis.alpha = alpha;
  basis.U.resize(beads, beads);
  basis.omega.resize(beads);

  const double pi = std::numbers::pi;
  const double p = beads;
  const double norm0 = 1.0 / std::sqrt(p);
  const double norm = std::sqrt(2.0 / p);
  for (int k = 0; k < beads; ++k) {
    basis.omega[k] = 2.0 * alpha * std::sin(k * pi / p);
    for (int j = 0; j < beads; ++j) {
      const double phase = 2.0 * pi * j * k / p;
      double value;
      if (k == 0) {
        value = norm0;
      } else if (2 * k < beads) {
        value = norm * std::cos(phase);
      } else if (2 * k == beads) {
        value = (j % 2 == 0) ? norm0 : -norm0;
      } else {
        value = norm * std::sin(phase);
      }
      basis.U(j, k) = value;
    }
  }
  basis.omega[0] = 0.0;
  return basis;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

PropagatorCache build_propagator(const NormalModeBasis& basis, double h) {
  if (!(h > 0.0)) throw ValidationError("time step must be positive");
  const int n = basis.beads;
  Eigen::VectorXd a(n), b(n), c(n), d(n);
  for (int k = 0; k < n; ++k) {
    const double w = basis.omega[k];
    if (w == 0.0) {
      a[k] = 1.0;
      b[k] = h;
      c[k] = 0.0;
      d[k] = 1.0;
    } else {
      a[k] = std::cos(w * h);
      b[k] = std::sin(w * h) / w;
      c[k] = -w * std::sin(w * h);
      d[k] = sinc(w * h);
    }
  }
  const auto conjugate = [&basis](const Eigen::VectorXd& diag) {
    Eigen::MatrixXd m = basis.U * diag.asDiagonal() * basis.U.transpose();
    // exact symmetry; the product is symmetric only up to round-off
    return Eigen::MatrixXd(0.5 * (m + m.transpose()));
  };
  PropagatorCache cache;
  cache.h = h;
  cache.Ahat = conjugate(a);
  cache.Bhat = conjugate(b);
  cache.Chat = conjugate(c);
  cache.Dmoll = conjugate(d);
  return cache;
}

void propagate_free_inplace(Eigen::MatrixXd& positions, Eigen::MatrixXd& momenta,
                            const PropagatorCache& cache, const Eigen::VectorXd& masses) {
  if (positions.cols() != cache.beads() || momenta.cols() != cache.beads()) {
    throw ValidationError("propagate_free: bead count does not match propagator");
  }
  if (masses.size() != positions.rows() || momenta.rows() != positions.rows()) {
    throw ValidationError("propagate_free: mass vector does not match degrees of freedom");
  }
  Eigen::MatrixXd new_x = positions * cache.Ahat;
  new_x.noalias() += masses.cwiseInverse().asDiagonal() * momenta * cache.Bhat;
  Eigen::MatrixXd new_p = momenta * cache.Ahat;
  new_p.noalias() += masses.asDiagonal() * positions * cache.Chat;
  positions = std::move(new_x);
  momenta = std::move(new_p);
}

RingPolymerState propagate_free(const RingPolymerState& state, const PropagatorCache& cache,
                                const Eigen::VectorXd& masses) {
  RingPolymerState out = state;
  propagate_free_inplace(out.positions, out.momenta, cache, masses);
  out.time += cache.h;
  return out;
}

Eigen::MatrixXd mollify_positions(const Eigen::MatrixXd& positions, const PropagatorCache& cache) {
  return positions * cache.Dmoll;
}

Eigen::VectorXd apply_bhat(const PropagatorCache& cache, const Eigen::VectorXd& per_bead) {
  return cache.Bhat * per_bead;
}

}  // namespace rpmd
