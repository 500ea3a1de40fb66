// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails. Progress goes to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpmd/constraints.hpp"
#include "rpmd/diagnostics.hpp"
#include "rpmd/errors.hpp"
#include "rpmd/forcefield.hpp"
#include "rpmd/integrators.hpp"
#include "rpmd/normal_modes.hpp"
#include "rpmd/scenario.hpp"
#include "rpmd/state.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace rpmd;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Verdict()> body;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

// Worst constraint residuals over every recorded row of every run that completed.
struct ResidualLedger {
  double max_g = 0.0;
  double max_f = 0.0;
  int runs = 0;
  std::vector<std::string> offenders;

  void absorb(const std::string& label, const RunResult& r) {
    if (r.failed) return;
    ++runs;
    double g = 0.0, f = 0.0;
    for (const auto& row : r.trace.rows) {
      g = std::max(g, row.max_g);
      f = std::max(f, row.max_f);
    }
    max_g = std::max(max_g, g);
    max_f = std::max(max_f, f);
    if (g > 1e-10 || f > 1e-10) offenders.push_back(label);
  }
};

ResidualLedger residuals;

RunResult run_case(const std::string& label, const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run_scenario(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "  " << label << ": " << (r.failed ? "failed (" + r.reason + ")" : "ok") << ", "
            << r.steps_completed << " steps, " << fmt("%.1f", secs) << " s\n";
  residuals.absorb(label, r);
  return r;
}

ScenarioConfig with_scheme(const std::string& preset, Scheme scheme, double h, double delta_h,
                           long n_steps) {
  ScenarioConfig c = preset_config(preset);
  c.scheme.scheme = scheme;
  c.scheme.h = h;
  c.scheme.delta_h = delta_h;
  c.n_steps = n_steps;
  c.record_every = 1;
  return c;
}

double max_energy_error(const EnergyTrace& t) {
  double worst = 0.0;
  for (const auto& row : t.rows) worst = std::max(worst, std::abs(row.total - t.rows.front().total));
  return worst;
}

// 1. Free flow against adaptive ODE integration, and free-energy conservation.
Verdict free_flow() {
  std::mt19937_64 rng(101);
  double worst_ode = 0.0, worst_h0 = 0.0;
  for (int beads : {2, 4, 8, 16}) {
    const Eigen::VectorXd m = (Eigen::VectorXd(3) << 1.0, 1.008, 15.9994).finished();
    const double alpha = beads;
    const NormalModeBasis basis = build_basis(beads, alpha);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::MatrixXd x = fixture::gaussian(3, beads, rng), p = fixture::gaussian(3, beads, rng, 2.0);
      Eigen::MatrixXd xr = x, pr = p;
      propagate_free_inplace(x, p, build_propagator(basis, 1.0), m);
      oracle::ode_free_flow(xr, pr, m, alpha, 1.0);
      const double scale = std::max(xr.cwiseAbs().maxCoeff(), pr.cwiseAbs().maxCoeff());
      worst_ode = std::max(worst_ode, std::max((x - xr).cwiseAbs().maxCoeff(), (p - pr).cwiseAbs().maxCoeff()) / scale);
    }
    const PropagatorCache step = build_propagator(basis, 0.1);
    Eigen::MatrixXd x = fixture::gaussian(3, beads, rng), p = fixture::gaussian(3, beads, rng);
    const double e0 = kinetic_energy(p, m) + spring_energy(x, m, alpha);
    for (int i = 0; i < 10000; ++i) {
      propagate_free_inplace(x, p, step, m);
      worst_h0 = std::max(worst_h0, std::abs(kinetic_energy(p, m) + spring_energy(x, m, alpha) - e0) / e0);
    }
  }
  return {worst_ode <= 1e-8 && worst_h0 <= 1e-10,
          "max rel ODE error " + sci(worst_ode) + " (<= 1e-8), max rel H0 error " + sci(worst_h0) + " (<= 1e-10)"};
}

// 2. Basis orthonormality and frequencies against a dense eigensolve.
Verdict basis() {
  double worst_orth = 0.0, worst_freq = 0.0;
  for (int beads = 1; beads <= 32; ++beads) {
    const double alpha = beads;
    const NormalModeBasis b = build_basis(beads, alpha);
    const Eigen::MatrixXd gram = b.U.transpose() * b.U;
    worst_orth = std::max(worst_orth, (gram - Eigen::MatrixXd::Identity(beads, beads)).cwiseAbs().maxCoeff());
    std::vector<double> w(b.omega.data(), b.omega.data() + beads);
    std::sort(w.begin(), w.end());
    const std::vector<double> ref = oracle::brute_force_omega(beads, alpha);
    // Compared as squares: the dense solve fixes eigenvalues to roughly eps * 4 alpha^2, and a
    // square root of that noise near the zero mode would dwarf any real error.
    const double scale = 4.0 * alpha * alpha;
    for (int k = 0; k < beads; ++k) worst_freq = std::max(worst_freq, std::abs(w[k] * w[k] - ref[k] * ref[k]) / scale);
  }
  return {worst_orth <= 1e-12 && worst_freq <= 1e-10,
          "max |U^T U - I| " + sci(worst_orth) + " (<= 1e-12), max squared-frequency error " + sci(worst_freq) + " (<= 1e-10)"};
}

// 3. Single-bead solvers against textbook SHAKE and RATTLE.
Verdict solver_oracles() {
  const Topology w = build_water_topology(1, 10.0, {});
  const double h = 0.02;
  const PropagatorCache c = build_propagator(build_basis(1, 1.0), h);
  const ConstraintOptions tight{1e-14, 1e-14, 100};
  std::mt19937_64 rng(303);
  double worst_x = 0.0, worst_p = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const RingPolymerState s = initialize_state(w, 1, {}, 1.0, 5000 + trial);
    const Eigen::MatrixXd trial_x = s.positions + fixture::gaussian(9, 1, rng, 0.03);
    const auto nm = solve_position_multipliers(s.positions, trial_x, c, w, tight);
    worst_x = std::max(worst_x, (nm.positions - oracle::shake(trial_x, s.positions, w)).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd p = fixture::gaussian(9, 1, rng, 4.0);
    const auto vel = solve_velocity_multipliers(nm.positions, p, 0.5 * h, w, tight);
    worst_p = std::max(worst_p, (vel.momenta - oracle::rattle_velocities(p, nm.positions, w)).cwiseAbs().maxCoeff());
  }
  return {worst_x <= 1e-10 && worst_p <= 1e-10,
          "100 configs, max position diff " + sci(worst_x) + ", max momentum diff " + sci(worst_p) + " (<= 1e-10)"};
}

// 4. Reversibility, symplecticity, and the residual ledger of all passing runs.
Verdict structure() {
  double worst_rev = 0.0, worst_sym = 0.0;
  for (auto [scheme, dh] : {std::pair{Scheme::impulse_r, 0.0}, {Scheme::molly_r, 0.0}, {Scheme::mts, 0.005}}) {
    ScenarioConfig c = with_scheme("table2", scheme, 0.01, dh, 10);
    c.n_molecules = 2;
    c.beads = 4;
    c.cell_edge = 6.0;
    c.seed = 4;
    c.constraints.tol_g = 1e-12;
    c.constraints.tol_f = 1e-12;
    const Simulation sim = build_simulation(c);
    worst_rev = std::max(worst_rev, reversibility_defect(sim.initial, [&](const RingPolymerState& st) { return sim.integrator.step(st); }, 10));
    run_case(std::string("small water ") + std::string(to_string(scheme)), c);

    const MechanicalSystem toy = MechanicalSystem::from(fixture::point_particles(1, 1.3), 2, {});
    const ForceSplit fs{fixture::anharmonic(1.0, 0.5), fixture::anharmonic(0.7, 0.3), fixture::anharmonic(0.3, 0.2)};
    SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.h = 0.2;
    cfg.delta_h = 0.05;
    const Integrator integ(cfg, toy, fs, 2);
    std::mt19937_64 rng(14);
    const RingPolymerState s{fixture::gaussian(3, 2, rng, 0.5), fixture::gaussian(3, 2, rng, 0.5), 0.0};
    worst_sym = std::max(worst_sym, symplecticity_defect(s, [&](const RingPolymerState& st) { return integ.step(st); }, 1e-5));
  }
  const bool residual_ok = residuals.offenders.empty();
  std::string detail = "reversibility " + sci(worst_rev) + " (<= 1e-8), symplecticity " + sci(worst_sym) +
                       " (<= 1e-6), residuals over " + std::to_string(residuals.runs) + " passing runs: g " +
                       sci(residuals.max_g) + ", f " + sci(residuals.max_f) + " (<= 1e-10)";
  for (const auto& o : residuals.offenders) detail += "; over tolerance in " + o;
  return {worst_rev <= 1e-8 && worst_sym <= 1e-6 && residual_ok, detail};
}

// 5. Trigonometric schemes at large steps on the table2 preset.
Verdict near_conservation() {
  bool ok = true;
  std::ostringstream d;
  for (Scheme scheme : {Scheme::impulse_r, Scheme::molly_r}) {
    double lo = INFINITY, hi = 0.0;
    int completed = 0;
    for (double h : {0.02, 0.05, 0.075}) {
      const std::string label = std::string(to_string(scheme)) + " h=" + fmt("%g", h);
      const RunResult r = run_case(label, with_scheme("table2", scheme, h, 0.0, 10000));
      if (r.failed) {
        ok = false;
        d << label << " failed; ";
        continue;
      }
      const StabilityMetrics m = compute_metrics(r.trace);
      ++completed;
      ok = ok && std::abs(m.drift) <= 1e-4 && m.delta_e_r <= 1e-4;
      lo = std::min(lo, m.delta_e_r);
      hi = std::max(hi, m.delta_e_r);
      d << label << " D=" << sci(m.drift) << " dEr=" << sci(m.delta_e_r) << "; ";
    }
    if (completed == 3) {
      const double ratio = hi / lo;
      ok = ok && ratio <= 10.0;
      d << to_string(scheme) << " dEr max/min=" << fmt("%.2f", ratio) << "; ";
    } else {
      d << to_string(scheme) << " dEr max/min undefined; ";
    }
  }
  d << "bands |D|, dEr <= 1e-4, max/min <= 10";
  return {ok, d.str()};
}

// 6. Explicit-spring baselines against the trigonometric scheme.
Verdict baseline_contrast() {
  std::ostringstream d;
  bool ok = true;
  // Equal physical time of 5 for both RATTLE steps.
  const RunResult coarse = run_case("rattle h=5e-4", with_scheme("table2", Scheme::rattle, 5e-4, 0.0, 10000));
  const RunResult fine = run_case("rattle h=2e-4", with_scheme("table2", Scheme::rattle, 2e-4, 0.0, 25000));
  if (coarse.failed || fine.failed) {
    ok = false;
    d << "rattle run failed; ";
  } else {
    const double a = compute_metrics(coarse.trace).delta_e_r, b = compute_metrics(fine.trace).delta_e_r;
    ok = ok && a >= 5.0 * b;
    d << "rattle dEr " << sci(a) << " vs " << sci(b) << " ratio " << fmt("%.2f", a / b) << " (>= 5); ";
  }

  std::vector<double> rattle_i, impulse;
  for (double h : {0.02, 0.04, 0.05}) {
    const RunResult ri = run_case("rattle_i h=" + fmt("%g", h), with_scheme("table3", Scheme::rattle_i, h, h / 10, 5000));
    const RunResult ir = run_case("impulse_r h=" + fmt("%g", h), with_scheme("table3", Scheme::impulse_r, h, 0.0, 5000));
    rattle_i.push_back(ri.failed ? INFINITY : compute_metrics(ri.trace).delta_e_r);
    impulse.push_back(ir.failed ? NAN : compute_metrics(ir.trace).delta_e_r);
  }
  const bool monotone = rattle_i[0] < rattle_i[1] && rattle_i[1] < rattle_i[2];
  const double band = *std::max_element(impulse.begin(), impulse.end()) / *std::min_element(impulse.begin(), impulse.end());
  const bool banded = std::all_of(impulse.begin(), impulse.end(), [](double v) { return std::isfinite(v); }) && band <= 3.0;
  ok = ok && monotone && banded;
  d << "rattle_i dEr " << sci(rattle_i[0]) << ", " << sci(rattle_i[1]) << ", " << sci(rattle_i[2])
    << (monotone ? " increasing" : " not increasing") << "; impulse_r dEr " << sci(impulse[0]) << ", "
    << sci(impulse[1]) << ", " << sci(impulse[2]) << " max/min " << fmt("%.2f", band) << " (<= 3)";
  return {ok, d.str()};
}

// 7. Resonant step on the fig1 preset.
Verdict resonance() {
  std::ostringstream d;
  auto go = [&](Scheme s, double h) {
    return run_case(std::string(to_string(s)) + " h=" + fmt("%g", h), with_scheme("fig1", s, h, 0.0, 2000));
  };
  const RunResult i_ref = go(Scheme::impulse_r, 0.075), i_big = go(Scheme::impulse_r, 0.125);
  const RunResult m_ref = go(Scheme::molly_r, 0.075), m_big = go(Scheme::molly_r, 0.125);

  bool impulse_ok = false;
  if (i_big.failed) {
    impulse_ok = true;
    d << "impulse_r h=0.125 failed at step " << i_big.steps_completed + 1 << " (" << i_big.reason << "); ";
  } else if (!i_ref.failed) {
    const double a = max_energy_error(i_big.trace), b = max_energy_error(i_ref.trace);
    impulse_ok = a > 10.0 * b;
    d << "impulse_r max|E-E0| " << sci(a) << " vs " << sci(b) << " (> 10x); ";
  } else {
    d << "impulse_r h=0.075 reference failed (" << i_ref.reason << "); ";
  }

  bool molly_ok = false;
  if (m_ref.failed || m_big.failed) {
    d << "molly_r " << (m_ref.failed ? "h=0.075" : "h=0.125") << " failed ("
      << (m_ref.failed ? m_ref.reason : m_big.reason) << ")";
  } else {
    const double a = max_energy_error(m_big.trace), b = max_energy_error(m_ref.trace);
    molly_ok = a <= 3.0 * b;
    d << "molly_r max|E-E0| " << sci(a) << " vs " << sci(b) << " (<= 3x)";
  }
  return {impulse_ok && molly_ok, d.str()};
}

// 8. Indicator split against the smooth switch on the table4 preset.
Verdict nonsmooth() {
  const RunResult smooth = run_case("table4 smooth", with_scheme("table4", Scheme::mts, 0.1, 0.05, 2000));
  const RunResult rough = run_case("fig3 indicator", with_scheme("fig3", Scheme::mts, 0.1, 0.05, 2000));
  if (smooth.failed) return {false, "smooth run failed: " + smooth.reason};
  const double a = compute_metrics(smooth.trace).delta_e;
  const double b = rough.trace.rows.size() >= 2 ? compute_metrics(rough.trace).delta_e : NAN;
  std::string detail = "mean |E-E0| indicator " + sci(b) + " vs smooth " + sci(a) + " ratio " + fmt("%.1f", b / a) + " (>= 100)";
  if (rough.failed) detail += "; indicator run stopped: " + rough.reason;
  return {std::isfinite(b) && b >= 100.0 * a, detail};
}

// 9. Every force path against central differences of its energy.
Verdict gradients() {
  std::mt19937_64 rng(909);
  double worst = 0.0;
  auto check = [&](const std::function<double(const Eigen::MatrixXd&, Eigen::MatrixXd*)>& path, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd f;
    path(x, &f);
    const double scale = std::max(1e-8, f.cwiseAbs().maxCoeff());
    const double step = 1e-6;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        Eigen::MatrixXd xp = x, xm = x;
        xp(i, k) += step;
        xm(i, k) -= step;
        const double fd = -(path(xp, nullptr) - path(xm, nullptr)) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - f(i, k)) / scale);
      }
    }
  };
  for (TruncationMode mode : {TruncationMode::none, TruncationMode::nearest_image, TruncationMode::cutoff}) {
    const double edge = mode == TruncationMode::none ? 30.0 : 9.0;
    const Topology t = build_water_topology(2, edge, {}, {}, mode);
    ForceFieldSpec spec;
    spec.truncation_mode = mode;
    spec.r_cut = 6.0;
    spec.delta_r = 3.0;
    const ForceField ff(t, spec);
    const PropagatorCache moll = build_propagator(build_basis(4, 4.0), 0.3);
    for (int trial = 0; trial < 4; ++trial) {
      RingPolymerState s = initialize_state(t, 4, {}, 0.0, 90 + trial);
      const double sep = 3.0 + 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const Eigen::Vector3d axis = fixture::gaussian(3, 1, rng).col(0).normalized();
      const Eigen::Vector3d move = s.positions.block<3, 1>(0, 0) + sep * axis - s.positions.block<3, 1>(9, 0);
      for (int site = 3; site < 6; ++site) s.positions.middleRows(3 * site, 3).colwise() += move;
      s.positions += fixture::gaussian(s.positions.rows(), 4, rng, 0.03);
      for (PotentialPart part : {PotentialPart::full, PotentialPart::fast, PotentialPart::slow}) {
        check([&](const Eigen::MatrixXd& x, Eigen::MatrixXd* f) { return ff.evaluate(x, part, f); }, s.positions);
      }
      check([&](const Eigen::MatrixXd& x, Eigen::MatrixXd* f) {
        const Eigen::MatrixXd avg = x * moll.Dmoll;
        if (!f) return ff.energy(avg);
        Eigen::MatrixXd raw;
        const double e = ff.evaluate(avg, PotentialPart::full, &raw);
        *f = raw * moll.Dmoll.transpose();
        return e;
      }, s.positions);
    }
  }
  return {worst <= 1e-6, "max relative gradient error " + sci(worst) + " over full/fast/slow/mollified (<= 1e-6)"};
}

}  // namespace

int main() {
  // Structure preservation runs last so its residual check covers every other run.
  const std::vector<Criterion> order = {
      {1, "free-flow exactness", 10, free_flow},
      {2, "basis correctness", 5, basis},
      {3, "constraint solver oracle equivalence", 10, solver_oracles},
      {5, "near-conservation at large steps", 600, near_conservation},
      {6, "baseline contrast", 900, baseline_contrast},
      {7, "resonance demonstration", 300, resonance},
      {8, "non-smooth switch instability", 300, nonsmooth},
      {9, "gradient consistency", 10, gradients},
      {4, "structure preservation", 30, structure},
  };
  std::vector<std::string> lines(10);
  int failures = 0;
  for (const auto& c : order) {
    std::cerr << "criterion " << c.id << ": " << c.name << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool passed = v.passed && in_time;
    failures += passed ? 0 : 1;
    lines[c.id] = std::string(passed ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) + " " + c.name +
                  ": " + v.detail + "; runtime " + fmt("%.1f", secs) + " s (budget " +
                  fmt("%g", c.budget_seconds) + " s" + (in_time ? ")" : ", exceeded)");
    std::cerr << "  " << lines[c.id] << "\n";
  }
  for (int id = 1; id <= 9; ++id) std::cout << lines[id] << "\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
