#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rpmd/integrators.hpp"
#include "rpmd/state.hpp"

namespace rpmd {

struct EnergyComponents {
  double kinetic = 0.0;
  double spring = 0.0;
  double potential = 0.0;

  double total() const { return kinetic + spring + potential; }
};

double kinetic_energy(const Eigen::MatrixXd& momenta, const Eigen::VectorXd& masses);

// Sum over beads of (m alpha^2 / 2) |x_k - x_{k-1}|^2 with cyclic wrap.
double spring_energy(const Eigen::MatrixXd& positions, const Eigen::VectorXd& masses, double alpha);

using PotentialFn = std::function<double(const Eigen::MatrixXd& positions)>;

EnergyComponents hamiltonian(const RingPolymerState& state, const Eigen::VectorXd& masses,
                             double alpha, const PotentialFn& potential);

struct TraceRow {
  long step = 0;
  double time = 0.0;
  double kinetic = 0.0;
  double spring = 0.0;
  double potential = 0.0;
  double total = 0.0;
  double max_g = 0.0;
  double max_f = 0.0;
};

struct EnergyTrace {
  std::vector<std::pair<std::string, std::string>> metadata;  // insertion ordered
  std::vector<TraceRow> rows;

  // Empty string when the key is absent.
  std::string meta(const std::string& key) const;
  void set_meta(const std::string& key, std::string value);
};

struct StabilityMetrics {
  double drift = 0.0;      // regression slope of H_P over time, divided by mean kinetic energy
  double noise = 0.0;      // population variance of the regression residuals
  double delta_e = 0.0;    // mean |E(i) - E(0)| over rows 1..J
  double delta_e_r = 0.0;  // delta_e / mean kinetic energy
};

// Throws ValidationError for fewer than two rows.
StabilityMetrics compute_metrics(const EnergyTrace& trace);

TraceRow record_row(long step, const RingPolymerState& state, const MechanicalSystem& system,
                    const PotentialFn& potential);

struct RunResult {
  EnergyTrace trace;
  RingPolymerState final_state;
  bool failed = false;
  std::string reason;
  long steps_completed = 0;
  SolveReport position_report;  // worst case over the run
  SolveReport velocity_report;
  int max_position_iterations = 0;
};

using Stepper = std::function<StepOutcome(const RingPolymerState&)>;

// Records the initial state, then every record_every steps and the last step.
// A failed step stops the run and keeps the rows recorded so far.
RunResult run(const RingPolymerState& initial, const Stepper& stepper, long n_steps,
              long record_every, const MechanicalSystem& system, const PotentialFn& potential);

RunResult run(const RingPolymerState& initial, const Integrator& integrator, long n_steps,
              long record_every, const PotentialFn& potential);

// n steps forward, momentum flip, n steps, flip back; max-norm distance to the start.
// Throws ConvergenceError carrying the reason when a step fails.
double reversibility_defect(const RingPolymerState& state, const Stepper& stepper, int n_steps);

// Central-difference Jacobian J of one step in (x, p) and max |J^T S J - S| with
// S the canonical structure matrix. Intended for small unconstrained systems.
double symplecticity_defect(const RingPolymerState& state, const Stepper& stepper, double fd_step);

}  // namespace rpmd
