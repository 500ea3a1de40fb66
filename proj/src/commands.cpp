#include "rpmd/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "rpmd/constraints.hpp"
#include "rpmd/diagnostics.hpp"
#include "rpmd/errors.hpp"
#include "rpmd/forcefield.hpp"
#include "rpmd/normal_modes.hpp"
#include "rpmd/scenario.hpp"

namespace rpmd {
namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string summary_block(const RunResult& result, const ScenarioConfig& config) {
  std::ostringstream s;
  s << "scenario = " << config.preset << "\n"
    << "scheme = " << to_string(config.scheme.scheme) << "\n"
    << "h = " << config.scheme.h << "\n"
    << "delta_h = " << config.scheme.delta_h << "\n"
    << "steps_requested = " << config.n_steps << "\n"
    << "steps_completed = " << result.steps_completed << "\n"
    << "records = " << result.trace.rows.size() << "\n"
    << "status = " << (result.failed ? "failed" : "ok") << "\n";
  if (result.failed) s << "reason = " << result.reason << "\n";
  if (result.trace.rows.size() >= 2) {
    const StabilityMetrics m = compute_metrics(result.trace);
    s << "drift = " << sci(m.drift) << "\n"
      << "noise = " << sci(m.noise) << "\n"
      << "delta_e = " << sci(m.delta_e) << "\n"
      << "delta_e_r = " << sci(m.delta_e_r) << "\n";
  }
  s << "max_position_iterations = " << result.max_position_iterations << "\n"
    << "max_position_residual = " << sci(result.position_report.max_residual) << "\n"
    << "max_velocity_residual = " << sci(result.velocity_report.max_residual) << "\n";
  return s.str();
}

}  // namespace

int run_command(const RunArgs& args, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load_config(args.config_path);
    if (args.seed) config.seed = *args.seed;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const std::string path =
      args.out_path ? *args.out_path : (config.output.empty() ? "trace.csv" : config.output);
  try {
    const RunResult result = run_scenario(config);
    save_trace(path, result.trace);
    const std::string summary = summary_block(result, config);
    std::ofstream(path + ".summary") << summary;
    out << summary;
    if (result.failed) {
      err << "stepper failure at step " << result.steps_completed + 1 << ": " << result.reason
          << "\n";
      return kExitStepperFailure;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int analyze_command(const std::vector<std::string>& traces,
                    const std::optional<std::string>& csv_path, std::ostream& out,
                    std::ostream& err) {
  struct Row {
    std::string path, scheme;
    double h = 0.0, delta_h = 0.0;
    StabilityMetrics m;
  };
  std::vector<Row> rows;
  try {
    for (const auto& path : traces) {
      const EnergyTrace t = load_trace(path);
      Row r;
      r.path = path;
      r.scheme = t.meta("scheme");
      const std::string h = t.meta("h"), dh = t.meta("delta_h");
      r.h = h.empty() ? 0.0 : std::stod(h);
      r.delta_h = dh.empty() ? 0.0 : std::stod(dh);
      r.m = compute_metrics(t);
      rows.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.scheme, a.h, a.path) < std::tie(b.scheme, b.h, b.path);
  });

  std::ostringstream csv;
  csv << "scheme,h,delta_h,drift,noise,delta_e,delta_e_r,trace\n";
  out << std::left << std::setw(11) << "scheme" << std::setw(10) << "h" << std::setw(10)
      << "delta_h" << std::setw(15) << "Drift" << std::setw(15) << "Noise" << std::setw(15)
      << "dE" << std::setw(15) << "dE_r" << "trace\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(11) << r.scheme << std::setw(10) << r.h << std::setw(10)
        << r.delta_h << std::setw(15) << sci(r.m.drift) << std::setw(15) << sci(r.m.noise)
        << std::setw(15) << sci(r.m.delta_e) << std::setw(15) << sci(r.m.delta_e_r) << r.path
        << "\n";
    csv << r.scheme << "," << r.h << "," << r.delta_h << "," << sci(r.m.drift) << ","
        << sci(r.m.noise) << "," << sci(r.m.delta_e) << "," << sci(r.m.delta_e_r) << ","
        << r.path << "\n";
  }
  if (csv_path) {
    std::ofstream f(*csv_path);
    if (!f) {
      err << "error: cannot write '" << *csv_path << "'\n";
      return kExitValidation;
    }
    f << csv.str();
  }
  return kExitOk;
}

namespace {

// Free ring polymer, one dof per site, exact per-mode solution for comparison.
SelftestCheck check_free_flow(bool fault) {
  SelftestCheck c{"free-flow exactness", false, {}};
  const int beads = 8;
  Topology topo;
  topo.n_molecules = 2;
  topo.sites_per_molecule = 1;
  topo.site_masses = {1.7};
  topo.site_charges = {0.0};
  topo.cell_edge = 10.0;
  ReducedUnits units;
  MechanicalSystem sys = MechanicalSystem::from(topo, beads, units);
  SchemeConfig cfg;
  cfg.h = 0.05;
  ForceSplit none{zero_force(), zero_force(), zero_force()};
  Integrator integ(cfg, sys, none, beads);
  if (fault) integ.inject_chat_sign_fault();

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  RingPolymerState s;
  s.positions = Eigen::MatrixXd::NullaryExpr(topo.n_dof(), beads, [&] { return g(rng); });
  s.momenta = Eigen::MatrixXd::NullaryExpr(topo.n_dof(), beads, [&] { return g(rng); });

  const NormalModeBasis basis = build_basis(beads, units.alpha(beads));
  const int steps = 40;
  RingPolymerState cur = s;
  for (int i = 0; i < steps; ++i) cur = integ.step(cur).state;

  const double t = steps * cfg.h;
  const double m = topo.site_masses[0];
  const Eigen::MatrixXd q0 = s.positions * basis.U, p0 = s.momenta * basis.U;
  Eigen::MatrixXd q = q0, p = p0;
  for (int k = 0; k < beads; ++k) {
    const double w = basis.omega[k];
    if (w == 0.0) {
      q.col(k) = q0.col(k) + t / m * p0.col(k);
      continue;
    }
    q.col(k) = std::cos(w * t) * q0.col(k) + std::sin(w * t) / (m * w) * p0.col(k);
    p.col(k) = -m * w * std::sin(w * t) * q0.col(k) + std::cos(w * t) * p0.col(k);
  }
  const Eigen::MatrixXd x_ref = q * basis.U.transpose(), p_ref = p * basis.U.transpose();
  const double err = std::max((cur.positions - x_ref).cwiseAbs().maxCoeff(),
                              (cur.momenta - p_ref).cwiseAbs().maxCoeff());
  c.passed = err <= 1e-9;
  c.detail = "max error " + sci(err);
  return c;
}

SelftestCheck check_orthogonality() {
  SelftestCheck c{"basis orthogonality", true, {}};
  double worst = 0.0;
  for (int beads : {1, 2, 3, 4, 7, 8, 16, 32}) {
    const NormalModeBasis b = build_basis(beads, beads);
    worst = std::max(worst, (b.U.transpose() * b.U -
                             Eigen::MatrixXd::Identity(beads, beads)).cwiseAbs().maxCoeff());
  }
  c.passed = worst <= 1e-12;
  c.detail = "max |U^T U - I| " + sci(worst);
  return c;
}

ScenarioConfig small_water(Scheme scheme) {
  ScenarioConfig cfg = preset_config("table2");
  cfg.n_molecules = 2;
  cfg.beads = 4;
  cfg.cell_edge = 6.0;
  cfg.seed = 3;
  cfg.scheme.scheme = scheme;
  cfg.scheme.h = 0.01;
  cfg.scheme.delta_h = 0.005;
  cfg.constraints.tol_g = 1e-12;
  cfg.constraints.tol_f = 1e-12;
  return cfg;
}

SelftestCheck check_reversibility() {
  SelftestCheck c{"reversibility", true, {}};
  double worst = 0.0;
  try {
    for (Scheme s : {Scheme::impulse_r, Scheme::molly_r, Scheme::mts}) {
      const Simulation sim = build_simulation(small_water(s));
      worst = std::max(worst, reversibility_defect(sim.initial, [&](const RingPolymerState& st) {
        return sim.integrator.step(st);
      }, 10));
    }
  } catch (const std::exception& e) {
    c.passed = false;
    c.detail = e.what();
    return c;
  }
  c.passed = worst <= 1e-8;
  c.detail = "max defect " + sci(worst);
  return c;
}

SelftestCheck check_single_bead_oracle() {
  SelftestCheck c{"single-bead SHAKE/RATTLE equivalence", true, {}};
  const Topology topo = build_water_topology(1, 10.0, {});
  ConstraintOptions opts;
  opts.tol_g = 1e-13;
  const double h = 0.01;
  const NormalModeBasis basis = build_basis(1, 1.0);
  const PropagatorCache cache = build_propagator(basis, h);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  double worst = 0.0;
  RingPolymerState base = initialize_state(topo, 1, {}, 1.0, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd perturbed =
        base.positions + Eigen::MatrixXd::NullaryExpr(topo.n_dof(), 1, [&] { return u(rng); });
    const auto nm = solve_position_multipliers(base.positions, perturbed, cache, topo, opts);
    const auto classic = classic_shake(perturbed, base.positions, topo, h, opts);
    worst = std::max(worst, (nm.positions - classic.positions).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd p =
        Eigen::MatrixXd::NullaryExpr(topo.n_dof(), 1, [&] { return 20.0 * u(rng); });
    const auto vel = solve_velocity_multipliers(nm.positions, p, 0.5 * h, topo, opts);
    const Eigen::MatrixXd proj = classic_rattle_project(p, nm.positions, topo, {1e-10, 1e-14, 500});
    worst = std::max(worst, (vel.momenta - proj).cwiseAbs().maxCoeff());
  }
  c.passed = worst <= 1e-10;
  c.detail = "max difference " + sci(worst);
  return c;
}

SelftestCheck check_gradients() {
  SelftestCheck c{"force gradients", true, {}};
  const Topology topo = build_water_topology(2, 12.0, {});
  ForceFieldSpec spec;
  spec.r_cut = 6.0;
  spec.delta_r = 3.0;
  const ForceField ff(topo, spec);
  RingPolymerState s = initialize_state(topo, 1, {}, 0.0, 9);
  // Pull the molecules into the switching region.
  for (int site = 3; site < 6; ++site) s.positions(3 * site, 0) -= 1.0;
  double worst = 0.0;
  for (PotentialPart part : {PotentialPart::full, PotentialPart::fast, PotentialPart::slow}) {
    Eigen::MatrixXd f;
    ff.evaluate(s.positions, part, &f);
    const double step = 1e-6;
    for (Eigen::Index i = 0; i < s.positions.rows(); ++i) {
      Eigen::MatrixXd xp = s.positions, xm = s.positions;
      xp(i, 0) += step;
      xm(i, 0) -= step;
      const double fd = -(ff.energy(xp, part) - ff.energy(xm, part)) / (2 * step);
      const double scale = std::max(1e-3, f.cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(fd - f(i, 0)) / scale);
    }
  }
  c.passed = worst <= 1e-6;
  c.detail = "max relative error " + sci(worst);
  return c;
}

}  // namespace

std::vector<SelftestCheck> run_selftest(bool inject_chat_fault) {
  std::vector<SelftestCheck> checks;
  checks.push_back(check_orthogonality());
  checks.push_back(check_free_flow(inject_chat_fault));
  checks.push_back(check_reversibility());
  checks.push_back(check_single_bead_oracle());
  checks.push_back(check_gradients());
  return checks;
}

int selftest_command(bool inject_chat_fault, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  bool all = true;
  for (const auto& c : run_selftest(inject_chat_fault)) {
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  (" << c.detail << ")\n";
    all = all && c.passed;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << (all ? "selftest passed" : "selftest FAILED") << " in " << std::fixed
      << std::setprecision(2) << secs << " s\n";
  return all ? kExitOk : kExitStepperFailure;
}

}  // namespace rpmd
