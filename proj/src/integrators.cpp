#include "rpmd/integrators.hpp"

#include <cmath>
#include <exception>
#include <utility>

#include "rpmd/errors.hpp"

namespace rpmd {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::impulse_r: return "impulse_r";
    case Scheme::molly_r: return "molly_r";
    case Scheme::mts: return "mts";
    case Scheme::rattle: return "rattle";
    case Scheme::rattle_i: return "rattle_i";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
  for (Scheme s : {Scheme::impulse_r, Scheme::molly_r, Scheme::mts, Scheme::rattle,
                   Scheme::rattle_i}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown scheme '" + std::string(name) + "'");
}

namespace {

bool multi_step(Scheme s) { return s == Scheme::mts || s == Scheme::rattle_i; }

}  // namespace

int SchemeConfig::inner_steps() const {
  validate();
  if (!multi_step(scheme)) return 1;
  return static_cast<int>(std::lround(h / delta_h));
}

void SchemeConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("scheme.h must be positive");
  if (!multi_step(scheme)) return;
  if (!(delta_h > 0.0) || delta_h > h * (1.0 + 1e-12)) {
    throw ValidationError("scheme.delta_h must be positive and not exceed h");
  }
  const double ratio = h / delta_h;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ValidationError("scheme.delta_h must divide h into an integer number of steps");
  }
}

ForceProvider zero_force() {
  return [](const Eigen::MatrixXd& x, Eigen::MatrixXd& f) {
    f.setZero(x.rows(), x.cols());
    return 0.0;
  };
}

ForceProvider memoize(ForceProvider inner) {
  struct Memo {
    Eigen::MatrixXd positions;
    Eigen::MatrixXd forces;
    double energy = 0.0;
    bool valid = false;
  };
  auto memo = std::make_shared<Memo>();
  return [inner = std::move(inner), memo](const Eigen::MatrixXd& x, Eigen::MatrixXd& f) {
    if (!(memo->valid && memo->positions.rows() == x.rows() &&
          memo->positions.cols() == x.cols() && memo->positions == x)) {
      memo->valid = false;
      memo->energy = inner(x, memo->forces);
      memo->positions = x;
      memo->valid = true;
    }
    f = memo->forces;
    return memo->energy;
  };
}

MechanicalSystem MechanicalSystem::from(const Topology& topology, int beads,
                                        const ReducedUnits& units,
                                        const ConstraintOptions& options) {
  MechanicalSystem sys;
  sys.topology = topology;
  sys.masses = topology.dof_masses();
  sys.alpha = units.alpha(beads);
  sys.constraint_options = options;
  return sys;
}

Eigen::MatrixXd spring_forces(const Eigen::MatrixXd& positions, const Eigen::VectorXd& masses,
                              double alpha) {
  const int beads = static_cast<int>(positions.cols());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(positions.rows(), beads);
  if (beads < 2) return f;
  for (int k = 0; k < beads; ++k) {
    const int prev = (k + beads - 1) % beads;
    const int next = (k + 1) % beads;
    f.col(k) = 2.0 * positions.col(k) - positions.col(prev) - positions.col(next);
  }
  return -(alpha * alpha) * (masses.asDiagonal() * f);
}

namespace {

Eigen::MatrixXd force_of(const ForceProvider& provider, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd f;
  provider(x, f);
  return f;
}

Eigen::MatrixXd mollified_force(const ForceProvider& provider, const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& dmoll) {
  return force_of(provider, x * dmoll) * dmoll.transpose();
}

StepOutcome fail(const RingPolymerState& state, std::string reason) {
  StepOutcome out;
  out.state = state;
  out.failed = true;
  out.reason = std::move(reason);
  return out;
}

// One trigonometric step with kick force F evaluated by kick(x). Mutates x and p.
void trig_step(Eigen::MatrixXd& x, Eigen::MatrixXd& p,
               const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& kick,
               const PropagatorCache& cache, const MechanicalSystem& sys, StepOutcome& out) {
  const double half = 0.5 * cache.h;
  Eigen::MatrixXd p1 = p + half * kick(x);
  const Eigen::MatrixXd trial = x * cache.Ahat + sys.masses.cwiseInverse().asDiagonal() * p1 * cache.Bhat;
  const auto pos = solve_position_multipliers(x, trial, cache, sys.topology, sys.constraint_options);
  p1 += pos.impulse;
  propagate_free_inplace(x, p1, cache, sys.masses);
  p1 += half * kick(x);
  auto vel = solve_velocity_multipliers(x, p1, half, sys.topology, sys.constraint_options);
  p = std::move(vel.momenta);
  out.position_report.absorb(pos.report);
  out.velocity_report.absorb(vel.report);
}

void rattle_substep(Eigen::MatrixXd& x, Eigen::MatrixXd& p, const ForceProvider& force, double h,
                    const MechanicalSystem& sys, StepOutcome& out) {
  const Eigen::VectorXd inv_m = sys.masses.cwiseInverse();
  auto total = [&](const Eigen::MatrixXd& at) -> Eigen::MatrixXd {
    return force_of(force, at) + spring_forces(at, sys.masses, sys.alpha);
  };
  Eigen::MatrixXd p1 = p + 0.5 * h * total(x);
  const Eigen::MatrixXd trial = x + h * (inv_m.asDiagonal() * p1);
  auto shake = classic_shake(trial, x, sys.topology, h, sys.constraint_options);
  p1 += (sys.masses.asDiagonal() * (shake.positions - trial)) / h;
  x = std::move(shake.positions);
  p1 += 0.5 * h * total(x);
  SolveReport vr;
  p = classic_rattle_project(p1, x, sys.topology, sys.constraint_options, &vr);
  out.position_report.absorb(shake.report);
  out.velocity_report.absorb(vr);
}

template <class Body>
StepOutcome guarded(const RingPolymerState& state, double h, Body&& body) {
  StepOutcome out;
  Eigen::MatrixXd x = state.positions;
  Eigen::MatrixXd p = state.momenta;
  try {
    body(x, p, out);
  } catch (const ConvergenceError& e) {
    return fail(state, e.what());
  } catch (const SingularityError& e) {
    return fail(state, e.what());
  }
  if (!x.allFinite() || !p.allFinite()) return fail(state, "non-finite state");
  out.state.positions = std::move(x);
  out.state.momenta = std::move(p);
  out.state.time = state.time + h;
  return out;
}

}  // namespace

StepOutcome step_impulse_r(const RingPolymerState& state, const ForceProvider& slow,
                           const PropagatorCache& cache, const MechanicalSystem& system) {
  return guarded(state, cache.h, [&](Eigen::MatrixXd& x, Eigen::MatrixXd& p, StepOutcome& out) {
    trig_step(x, p, [&](const Eigen::MatrixXd& at) { return force_of(slow, at); }, cache, system,
              out);
  });
}

StepOutcome step_molly_r(const RingPolymerState& state, const ForceProvider& slow,
                         const PropagatorCache& cache, const MechanicalSystem& system) {
  return guarded(state, cache.h, [&](Eigen::MatrixXd& x, Eigen::MatrixXd& p, StepOutcome& out) {
    trig_step(
        x, p, [&](const Eigen::MatrixXd& at) { return mollified_force(slow, at, cache.Dmoll); },
        cache, system, out);
  });
}

StepOutcome step_mts(const RingPolymerState& state, const ForceProvider& fast,
                     const ForceProvider& slow, const PropagatorCache& inner, int inner_steps,
                     const MechanicalSystem& system, const PropagatorCache* mollifier) {
  const double h = inner.h * inner_steps;
  return guarded(state, h, [&](Eigen::MatrixXd& x, Eigen::MatrixXd& p, StepOutcome& out) {
    auto slow_kick = [&](const Eigen::MatrixXd& at) {
      return mollifier ? mollified_force(slow, at, mollifier->Dmoll) : force_of(slow, at);
    };
    auto fast_kick = [&](const Eigen::MatrixXd& at) { return force_of(fast, at); };
    p += 0.5 * h * slow_kick(x);
    for (int i = 0; i < inner_steps; ++i) trig_step(x, p, fast_kick, inner, system, out);
    p += 0.5 * h * slow_kick(x);
    auto vel = solve_velocity_multipliers(x, p, 0.5 * h, system.topology,
                                          system.constraint_options);
    p = std::move(vel.momenta);
    out.velocity_report.absorb(vel.report);
  });
}

StepOutcome step_rattle(const RingPolymerState& state, const ForceProvider& force, double h,
                        const MechanicalSystem& system) {
  return guarded(state, h, [&](Eigen::MatrixXd& x, Eigen::MatrixXd& p, StepOutcome& out) {
    rattle_substep(x, p, force, h, system, out);
  });
}

StepOutcome step_rattle_i(const RingPolymerState& state, const ForceProvider& fast,
                          const ForceProvider& slow, double h, int inner_steps,
                          const MechanicalSystem& system) {
  return guarded(state, h, [&](Eigen::MatrixXd& x, Eigen::MatrixXd& p, StepOutcome& out) {
    const double dh = h / inner_steps;
    p += 0.5 * h * force_of(slow, x);
    for (int i = 0; i < inner_steps; ++i) rattle_substep(x, p, fast, dh, system, out);
    p += 0.5 * h * force_of(slow, x);
    SolveReport vr;
    p = classic_rattle_project(p, x, system.topology, system.constraint_options, &vr);
    out.velocity_report.absorb(vr);
  });
}

Integrator::Integrator(SchemeConfig config, MechanicalSystem system, ForceSplit forces, int beads)
    : config_(std::move(config)), system_(std::move(system)) {
  config_.validate();
  forces_.full = memoize(forces.full ? std::move(forces.full) : zero_force());
  forces_.fast = memoize(forces.fast ? std::move(forces.fast) : zero_force());
  forces_.slow = memoize(forces.slow ? std::move(forces.slow) : zero_force());
  const NormalModeBasis basis = build_basis(beads, system_.alpha);
  outer_ = std::make_shared<PropagatorCache>(build_propagator(basis, config_.h));
  if (config_.scheme == Scheme::mts) {
    inner_ = std::make_shared<PropagatorCache>(build_propagator(basis, config_.h / config_.inner_steps()));
  }
}

StepOutcome Integrator::step(const RingPolymerState& state) const {
  switch (config_.scheme) {
    case Scheme::impulse_r: return step_impulse_r(state, forces_.full, *outer_, system_);
    case Scheme::molly_r: return step_molly_r(state, forces_.full, *outer_, system_);
    case Scheme::mts:
      return step_mts(state, forces_.fast, forces_.slow, *inner_, config_.inner_steps(), system_,
                      config_.mollify ? outer_.get() : nullptr);
    case Scheme::rattle: return step_rattle(state, forces_.full, config_.h, system_);
    case Scheme::rattle_i:
      return step_rattle_i(state, forces_.fast, forces_.slow, config_.h, config_.inner_steps(),
                           system_);
  }
  throw ValidationError("unknown scheme");
}

void Integrator::inject_chat_sign_fault() {
  outer_->Chat = -outer_->Chat;
  if (inner_) inner_->Chat = -inner_->Chat;
}

}  // namespace rpmd
