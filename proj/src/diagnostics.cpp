#include "rpmd/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "rpmd/constraints.hpp"
#include "rpmd/errors.hpp"

namespace rpmd {

double kinetic_energy(const Eigen::MatrixXd& momenta, const Eigen::VectorXd& masses) {
  return 0.5 * (masses.cwiseInverse().asDiagonal() * momenta.cwiseAbs2()).sum();
}

double spring_energy(const Eigen::MatrixXd& positions, const Eigen::VectorXd& masses,
                     double alpha) {
  const int beads = static_cast<int>(positions.cols());
  double sum = 0.0;
  for (int k = 0; k < beads; ++k) {
    const int prev = (k + beads - 1) % beads;
    sum += masses.dot((positions.col(k) - positions.col(prev)).cwiseAbs2());
  }
  return 0.5 * alpha * alpha * sum;
}

EnergyComponents hamiltonian(const RingPolymerState& state, const Eigen::VectorXd& masses,
                             double alpha, const PotentialFn& potential) {
  EnergyComponents e;
  e.kinetic = kinetic_energy(state.momenta, masses);
  e.spring = spring_energy(state.positions, masses, alpha);
  e.potential = potential ? potential(state.positions) : 0.0;
  return e;
}

std::string EnergyTrace::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

void EnergyTrace::set_meta(const std::string& key, std::string value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(key, std::move(value));
}

StabilityMetrics compute_metrics(const EnergyTrace& trace) {
  const auto& rows = trace.rows;
  const std::size_t n = rows.size();
  if (n < 2) throw ValidationError("metrics need at least two trace rows");

  double t_mean = 0.0, e_mean = 0.0, k_mean = 0.0;
  for (const auto& r : rows) {
    t_mean += r.time;
    e_mean += r.total;
    k_mean += r.kinetic;
  }
  t_mean /= n;
  e_mean /= n;
  k_mean /= n;

  double stt = 0.0, ste = 0.0;
  for (const auto& r : rows) {
    stt += (r.time - t_mean) * (r.time - t_mean);
    ste += (r.time - t_mean) * (r.total - e_mean);
  }
  if (!(stt > 0.0)) throw ValidationError("metrics need distinct trace times");
  const double slope = ste / stt;
  const double intercept = e_mean - slope * t_mean;

  double ss = 0.0, abs_dev = 0.0;
  for (const auto& r : rows) {
    const double resid = r.total - (intercept + slope * r.time);
    ss += resid * resid;
  }
  for (std::size_t i = 1; i < n; ++i) abs_dev += std::abs(rows[i].total - rows[0].total);

  StabilityMetrics m;
  m.drift = slope / k_mean;
  m.noise = ss / n;
  m.delta_e = abs_dev / static_cast<double>(n - 1);
  m.delta_e_r = m.delta_e / k_mean;
  return m;
}

TraceRow record_row(long step, const RingPolymerState& state, const MechanicalSystem& system,
                    const PotentialFn& potential) {
  const EnergyComponents e = hamiltonian(state, system.masses, system.alpha, potential);
  TraceRow row;
  row.step = step;
  row.time = state.time;
  row.kinetic = e.kinetic;
  row.spring = e.spring;
  row.potential = e.potential;
  row.total = e.total();
  row.max_g = max_abs(residual_g(state.positions, system.topology));
  row.max_f = max_abs(residual_f(state.positions, state.momenta, system.topology));
  return row;
}

RunResult run(const RingPolymerState& initial, const Stepper& stepper, long n_steps,
              long record_every, const MechanicalSystem& system, const PotentialFn& potential) {
  if (n_steps < 0) throw ValidationError("run.n_steps must be non-negative");
  if (record_every < 1) throw ValidationError("run.record_every must be at least 1");
  RunResult result;
  result.final_state = initial;
  result.trace.rows.push_back(record_row(0, initial, system, potential));
  for (long step = 1; step <= n_steps; ++step) {
    StepOutcome out = stepper(result.final_state);
    if (out.failed) {
      result.failed = true;
      result.reason = out.reason;
      break;
    }
    result.final_state = std::move(out.state);
    result.steps_completed = step;
    result.position_report.absorb(out.position_report);
    result.velocity_report.absorb(out.velocity_report);
    result.max_position_iterations =
        std::max(result.max_position_iterations, out.position_report.iterations);
    if (step % record_every == 0 || step == n_steps) {
      result.trace.rows.push_back(record_row(step, result.final_state, system, potential));
    }
  }
  return result;
}

RunResult run(const RingPolymerState& initial, const Integrator& integrator, long n_steps,
              long record_every, const PotentialFn& potential) {
  return run(
      initial, [&](const RingPolymerState& s) { return integrator.step(s); }, n_steps,
      record_every, integrator.system(), potential);
}

namespace {

RingPolymerState advance(RingPolymerState s, const Stepper& stepper, int n_steps) {
  for (int i = 0; i < n_steps; ++i) {
    StepOutcome out = stepper(s);
    if (out.failed) throw ConvergenceError(out.reason, 0.0, i);
    s = std::move(out.state);
  }
  return s;
}

}  // namespace

double reversibility_defect(const RingPolymerState& state, const Stepper& stepper, int n_steps) {
  RingPolymerState s = advance(state, stepper, n_steps);
  s.momenta = -s.momenta;
  s = advance(std::move(s), stepper, n_steps);
  s.momenta = -s.momenta;
  return std::max((s.positions - state.positions).cwiseAbs().maxCoeff(),
                  (s.momenta - state.momenta).cwiseAbs().maxCoeff());
}

double symplecticity_defect(const RingPolymerState& state, const Stepper& stepper,
                            double fd_step) {
  const Eigen::Index rows = state.positions.rows();
  const Eigen::Index cols = state.positions.cols();
  const Eigen::Index n = rows * cols;
  auto pack = [&](const RingPolymerState& s) {
    Eigen::VectorXd z(2 * n);
    z.head(n) = Eigen::Map<const Eigen::VectorXd>(s.positions.data(), n);
    z.tail(n) = Eigen::Map<const Eigen::VectorXd>(s.momenta.data(), n);
    return z;
  };
  auto unpack = [&](const Eigen::VectorXd& z) {
    RingPolymerState s;
    s.positions = Eigen::Map<const Eigen::MatrixXd>(z.data(), rows, cols);
    s.momenta = Eigen::Map<const Eigen::MatrixXd>(z.data() + n, rows, cols);
    s.time = state.time;
    return s;
  };
  auto flow = [&](const Eigen::VectorXd& z) {
    StepOutcome out = stepper(unpack(z));
    if (out.failed) throw ConvergenceError(out.reason, 0.0, 0);
    return pack(out.state);
  };

  const Eigen::VectorXd z0 = pack(state);
  Eigen::MatrixXd jac(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    Eigen::VectorXd plus = z0, minus = z0;
    plus[i] += fd_step;
    minus[i] -= fd_step;
    jac.col(i) = (flow(plus) - flow(minus)) / (2.0 * fd_step);
  }
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sigma.topRightCorner(n, n).setIdentity();
  sigma.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return (jac.transpose() * sigma * jac - sigma).cwiseAbs().maxCoeff();
}

}  // namespace rpmd
