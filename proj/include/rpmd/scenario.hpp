#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "rpmd/constraints.hpp"
#include "rpmd/diagnostics.hpp"
#include "rpmd/errors.hpp"
#include "rpmd/forcefield.hpp"
#include "rpmd/integrators.hpp"
#include "rpmd/topology.hpp"

namespace rpmd {

// Everything a run needs. Text form: `[section]` headers followed by
// `key = value` lines; `#` starts a comment. Sections and keys:
//
//   [scenario]     preset, n_steps, record_every, seed, temperature, output
//   [system]       n_molecules, beads, cell_edge, r_oh, angle_hoh, beta, truncation
//   [forcefield]   lj_a, lj_b, r_cut, delta_r, split_enabled, nonsmooth_split_radius
//   [scheme]       scheme, h, delta_h, mollify
//   [constraints]  tol_g, tol_f, max_iter
//
// A preset fills every field first; the remaining keys then override it,
// wherever they appear in the file.
struct ScenarioConfig {
  std::string preset = "custom";
  long n_steps = 1000;
  long record_every = 1;
  std::uint64_t seed = 1;
  double temperature = 1.0;  // sampling k_B T in units of 1/beta
  std::string output;

  int n_molecules = 8;
  int beads = 16;
  double cell_edge = 6.2;
  WaterGeometry geometry;
  double beta = 1.0;

  ForceFieldSpec forcefield;  // carries the truncation mode
  SchemeConfig scheme;
  ConstraintOptions constraints;

  bool operator==(const ScenarioConfig&) const;

  // Throws ValidationError naming the offending key.
  void validate() const;
};

// Error in a config file or string, carrying the 1-based line (0 when not tied to a line).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, int line, std::string key)
      : ValidationError(what), line_(line), key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

// table2 | table3 | table4 | fig1 | fig3 | custom. Throws ValidationError otherwise.
ScenarioConfig preset_config(const std::string& name);

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

// The assembled simulation for one config.
struct Simulation {
  Topology topology;
  ForceField forcefield;
  MechanicalSystem system;
  Integrator integrator;
  RingPolymerState initial;

  PotentialFn potential() const;
};

Simulation build_simulation(const ScenarioConfig& config);

ForceSplit force_split(const ForceField& forcefield);

// Runs the scenario and tags the trace with scheme, h, delta_h, seed, scenario and status.
RunResult run_scenario(const ScenarioConfig& config);

// CSV trace: `# key=value` metadata lines, then the header row and one row per record.
void write_trace(std::ostream& out, const EnergyTrace& trace);
EnergyTrace read_trace(std::istream& in);
void save_trace(const std::string& path, const EnergyTrace& trace);
EnergyTrace load_trace(const std::string& path);

inline constexpr const char* kTraceHeader = "step,time,kinetic,spring,potential,total,max_g,max_f";

}  // namespace rpmd
