#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "rpmd/constraints.hpp"
#include "rpmd/normal_modes.hpp"
#include "rpmd/state.hpp"
#include "rpmd/topology.hpp"

namespace rpmd {

enum class Scheme { impulse_r, molly_r, mts, rattle, rattle_i };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);

struct SchemeConfig {
  Scheme scheme = Scheme::impulse_r;
  double h = 0.02;
  double delta_h = 0.0;  // inner step for mts / rattle_i; h / delta_h must be a positive integer
  bool mollify = false;  // mts only: mollify the slow force with D(h)

  // Number of inner steps; 1 for single-step schemes. Throws ValidationError.
  int inner_steps() const;
  void validate() const;
};

// Writes -grad V into forces (resized to the shape of positions) and returns V.
using ForceProvider = std::function<double(const Eigen::MatrixXd& positions, Eigen::MatrixXd& forces)>;

// A provider that returns zero energy and zero force.
ForceProvider zero_force();

// Memoizes the most recent evaluation, keyed on exact equality of the positions.
// Consecutive half-kicks of a splitting scheme evaluate the same configuration twice.
ForceProvider memoize(ForceProvider inner);

// Everything the steppers need besides forces and step sizes.
struct MechanicalSystem {
  Topology topology;
  Eigen::VectorXd masses;  // per degree of freedom
  double alpha = 1.0;      // spring frequency scale P / (beta hbar)
  ConstraintOptions constraint_options;

  static MechanicalSystem from(const Topology& topology, int beads, const ReducedUnits& units,
                               const ConstraintOptions& options = {});
};

struct StepOutcome {
  RingPolymerState state;
  bool failed = false;
  std::string reason;
  SolveReport position_report;
  SolveReport velocity_report;
};

// Forces of the harmonic bead springs, -m alpha^2 (2 x_k - x_{k-1} - x_{k+1}).
Eigen::MatrixXd spring_forces(const Eigen::MatrixXd& positions, const Eigen::VectorXd& masses,
                              double alpha);

// The trigonometric step: half kick by the slow force and the position-constraint
// impulse, exact free ring-polymer flight, half kick at the new positions and the
// velocity-constraint impulse. Failure leaves the input state in the outcome.
StepOutcome step_impulse_r(const RingPolymerState& state, const ForceProvider& slow,
                           const PropagatorCache& cache, const MechanicalSystem& system);

// As step_impulse_r with the slow force replaced by Dmoll^T F(x Dmoll), the
// gradient of the potential at time-averaged positions.
StepOutcome step_molly_r(const RingPolymerState& state, const ForceProvider& slow,
                         const PropagatorCache& cache, const MechanicalSystem& system);

// Outer slow half kicks around inner trigonometric steps of length inner.h driven by
// the fast force, then a final velocity projection. When mollifier is non-null the
// slow force is evaluated through mollifier->Dmoll.
StepOutcome step_mts(const RingPolymerState& state, const ForceProvider& fast,
                     const ForceProvider& slow, const PropagatorCache& inner, int inner_steps,
                     const MechanicalSystem& system, const PropagatorCache* mollifier = nullptr);

// Velocity Verlet with explicit spring forces, classic SHAKE on positions and
// classic RATTLE on momenta.
StepOutcome step_rattle(const RingPolymerState& state, const ForceProvider& force, double h,
                        const MechanicalSystem& system);

// Impulse multiple time stepping with RATTLE inner steps (springs + fast force).
StepOutcome step_rattle_i(const RingPolymerState& state, const ForceProvider& fast,
                          const ForceProvider& slow, double h, int inner_steps,
                          const MechanicalSystem& system);

struct ForceSplit {
  ForceProvider full;
  ForceProvider fast;
  ForceProvider slow;
};

// Binds a scheme to its forces and cached propagators.
class Integrator {
 public:
  Integrator(SchemeConfig config, MechanicalSystem system, ForceSplit forces, int beads);

  StepOutcome step(const RingPolymerState& state) const;

  const SchemeConfig& config() const { return config_; }
  const MechanicalSystem& system() const { return system_; }

  // Debug hook for fault-injection tests: flips the sign of every cached Chat.
  void inject_chat_sign_fault();

 private:
  SchemeConfig config_;
  MechanicalSystem system_;
  ForceSplit forces_;
  std::shared_ptr<PropagatorCache> outer_;
  std::shared_ptr<PropagatorCache> inner_;
};

}  // namespace rpmd
