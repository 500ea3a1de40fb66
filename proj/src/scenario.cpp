#include "rpmd/scenario.hpp"

#include <charconv>
#include <cstdio>
#include <memory>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "rpmd/errors.hpp"
#include "rpmd/state.hpp"

namespace rpmd {

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  const auto& a = forcefield;
  const auto& b = o.forcefield;
  return preset == o.preset && n_steps == o.n_steps && record_every == o.record_every &&
         seed == o.seed && temperature == o.temperature && output == o.output &&
         n_molecules == o.n_molecules && beads == o.beads && cell_edge == o.cell_edge &&
         geometry.r_oh == o.geometry.r_oh && geometry.angle_hoh == o.geometry.angle_hoh &&
         beta == o.beta && a.lj_a == b.lj_a && a.lj_b == b.lj_b && a.r_cut == b.r_cut &&
         a.delta_r == b.delta_r && a.split_enabled == b.split_enabled &&
         a.truncation_mode == b.truncation_mode &&
         a.nonsmooth_split_radius == b.nonsmooth_split_radius &&
         scheme.scheme == o.scheme.scheme && scheme.h == o.scheme.h &&
         scheme.delta_h == o.scheme.delta_h && scheme.mollify == o.scheme.mollify &&
         constraints.tol_g == o.constraints.tol_g && constraints.tol_f == o.constraints.tol_f &&
         constraints.max_iter == o.constraints.max_iter;
}

void ScenarioConfig::validate() const {
  if (n_steps < 0) throw ValidationError("scenario.n_steps must be non-negative");
  if (record_every < 1) throw ValidationError("scenario.record_every must be at least 1");
  if (!(temperature >= 0.0)) throw ValidationError("scenario.temperature must be non-negative");
  if (n_molecules < 1) throw ValidationError("system.n_molecules must be at least 1");
  if (beads < 1) throw ValidationError("system.beads must be at least 1");
  if (!(cell_edge > 0.0)) throw ValidationError("system.cell_edge must be positive");
  if (!(geometry.r_oh > 0.0)) throw ValidationError("system.r_oh must be positive");
  if (!(geometry.angle_hoh > 0.0 && geometry.angle_hoh <= 180.0)) {
    throw ValidationError("system.angle_hoh must lie in (0, 180]");
  }
  if (!(beta > 0.0)) throw ValidationError("system.beta must be positive");
  if (!(constraints.tol_g > 0.0)) throw ValidationError("constraints.tol_g must be positive");
  if (!(constraints.tol_f > 0.0)) throw ValidationError("constraints.tol_f must be positive");
  if (constraints.max_iter < 1) throw ValidationError("constraints.max_iter must be at least 1");
  forcefield.validate();
  scheme.validate();
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  c.preset = name;
  if (name == "custom") return c;
  if (name == "table2" || name == "fig1") {
    c.n_molecules = 8;
    c.beads = 16;
    c.cell_edge = 6.2;
    c.forcefield.truncation_mode = TruncationMode::none;
    c.scheme.scheme = Scheme::impulse_r;
    c.scheme.h = 0.02;
    c.n_steps = 10000;
    if (name == "fig1") {
      c.scheme.h = 0.125;
      c.n_steps = 2000;
    }
    return c;
  }
  if (name == "table3") {
    c.n_molecules = 8;
    c.beads = 8;
    c.cell_edge = 6.2;
    c.forcefield.truncation_mode = TruncationMode::nearest_image;
    c.scheme.scheme = Scheme::rattle_i;
    c.scheme.h = 0.02;
    c.scheme.delta_h = 0.002;
    c.n_steps = 10000;
    return c;
  }
  if (name == "table4" || name == "fig3") {
    c.n_molecules = 27;
    c.beads = 4;
    c.cell_edge = 9.3;
    c.forcefield.truncation_mode = TruncationMode::cutoff;
    c.forcefield.r_cut = 8.0;
    c.forcefield.delta_r = 4.5;
    c.scheme.scheme = Scheme::mts;
    c.scheme.h = 0.1;
    c.scheme.delta_h = 0.05;
    c.n_steps = 2000;
    if (name == "fig3") c.forcefield.nonsmooth_split_radius = 5.75;
    return c;
  }
  throw ValidationError("unknown preset '" + name + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& text, const std::string& key, int line) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "': cannot parse '" +
                          text + "' as a number",
                      line, key);
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& key, int line) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": key '" + key + "': expected true or false",
                    line, key);
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [](double ScenarioConfig::*field) {
      return Setter([field](ScenarioConfig& c, const std::string& v, const std::string& k, int l) {
        c.*field = parse_number<double>(v, k, l);
      });
    };
    t["scenario.n_steps"] = [](auto& c, auto& v, auto& k, int l) { c.n_steps = parse_number<long>(v, k, l); };
    t["scenario.record_every"] = [](auto& c, auto& v, auto& k, int l) { c.record_every = parse_number<long>(v, k, l); };
    t["scenario.seed"] = [](auto& c, auto& v, auto& k, int l) { c.seed = parse_number<std::uint64_t>(v, k, l); };
    t["scenario.temperature"] = dbl(&ScenarioConfig::temperature);
    t["scenario.output"] = [](auto& c, auto& v, auto&, int) { c.output = v; };
    t["system.n_molecules"] = [](auto& c, auto& v, auto& k, int l) { c.n_molecules = parse_number<int>(v, k, l); };
    t["system.beads"] = [](auto& c, auto& v, auto& k, int l) { c.beads = parse_number<int>(v, k, l); };
    t["system.cell_edge"] = dbl(&ScenarioConfig::cell_edge);
    t["system.r_oh"] = [](auto& c, auto& v, auto& k, int l) { c.geometry.r_oh = parse_number<double>(v, k, l); };
    t["system.angle_hoh"] = [](auto& c, auto& v, auto& k, int l) { c.geometry.angle_hoh = parse_number<double>(v, k, l); };
    t["system.beta"] = dbl(&ScenarioConfig::beta);
    t["system.truncation"] = [](auto& c, auto& v, auto& k, int l) {
      try {
        c.forcefield.truncation_mode = truncation_mode_from_string(v);
      } catch (const ValidationError& e) {
        throw ConfigError("line " + std::to_string(l) + ": key '" + k + "': " + e.what(), l, k);
      }
    };
    t["forcefield.lj_a"] = [](auto& c, auto& v, auto& k, int l) { c.forcefield.lj_a = parse_number<double>(v, k, l); };
    t["forcefield.lj_b"] = [](auto& c, auto& v, auto& k, int l) { c.forcefield.lj_b = parse_number<double>(v, k, l); };
    t["forcefield.r_cut"] = [](auto& c, auto& v, auto& k, int l) { c.forcefield.r_cut = parse_number<double>(v, k, l); };
    t["forcefield.delta_r"] = [](auto& c, auto& v, auto& k, int l) { c.forcefield.delta_r = parse_number<double>(v, k, l); };
    t["forcefield.split_enabled"] = [](auto& c, auto& v, auto& k, int l) { c.forcefield.split_enabled = parse_bool(v, k, l); };
    t["forcefield.nonsmooth_split_radius"] = [](auto& c, auto& v, auto& k, int l) {
      c.forcefield.nonsmooth_split_radius = parse_number<double>(v, k, l);
    };
    t["scheme.scheme"] = [](auto& c, auto& v, auto& k, int l) {
      try {
        c.scheme.scheme = scheme_from_string(v);
      } catch (const ValidationError& e) {
        throw ConfigError("line " + std::to_string(l) + ": key '" + k + "': " + e.what(), l, k);
      }
    };
    t["scheme.h"] = [](auto& c, auto& v, auto& k, int l) { c.scheme.h = parse_number<double>(v, k, l); };
    t["scheme.delta_h"] = [](auto& c, auto& v, auto& k, int l) { c.scheme.delta_h = parse_number<double>(v, k, l); };
    t["scheme.mollify"] = [](auto& c, auto& v, auto& k, int l) { c.scheme.mollify = parse_bool(v, k, l); };
    t["constraints.tol_g"] = [](auto& c, auto& v, auto& k, int l) { c.constraints.tol_g = parse_number<double>(v, k, l); };
    t["constraints.tol_f"] = [](auto& c, auto& v, auto& k, int l) { c.constraints.tol_f = parse_number<double>(v, k, l); };
    t["constraints.max_iter"] = [](auto& c, auto& v, auto& k, int l) { c.constraints.max_iter = parse_number<int>(v, k, l); };
    return t;
  }();
  return table;
}

struct Entry {
  std::string key;
  std::string value;
  int line;
};

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  std::vector<Entry> entries;
  std::string preset = "custom";
  int preset_line = 0;
  std::map<std::string, int> seen;

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header", line_no, "");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no, "");
    }
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string key = section.empty() ? name : section + "." + name;
    if (name.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key", line_no, key);
    }
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                            "' repeats line " + std::to_string(it->second),
                        line_no, key);
    }
    seen[key] = line_no;
    if (key == "scenario.preset") {
      preset = value;
      preset_line = line_no;
      continue;
    }
    if (!setters().count(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", line_no, key);
    }
    entries.push_back({key, value, line_no});
  }

  ScenarioConfig config;
  try {
    config = preset_config(preset);
  } catch (const ValidationError& e) {
    throw ConfigError("line " + std::to_string(preset_line) + ": key 'scenario.preset': " + e.what(),
                      preset_line, "scenario.preset");
  }
  for (const auto& e : entries) setters().at(e.key)(config, e.value, e.key, e.line);
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), 0, "");
  }
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "[scenario]\n"
      << "preset = " << c.preset << "\n"
      << "n_steps = " << c.n_steps << "\n"
      << "record_every = " << c.record_every << "\n"
      << "seed = " << c.seed << "\n"
      << "temperature = " << c.temperature << "\n";
  if (!c.output.empty()) out << "output = " << c.output << "\n";
  out << "\n[system]\n"
      << "n_molecules = " << c.n_molecules << "\n"
      << "beads = " << c.beads << "\n"
      << "cell_edge = " << c.cell_edge << "\n"
      << "r_oh = " << c.geometry.r_oh << "\n"
      << "angle_hoh = " << c.geometry.angle_hoh << "\n"
      << "beta = " << c.beta << "\n"
      << "truncation = " << to_string(c.forcefield.truncation_mode) << "\n"
      << "\n[forcefield]\n"
      << "lj_a = " << c.forcefield.lj_a << "\n"
      << "lj_b = " << c.forcefield.lj_b << "\n"
      << "r_cut = " << c.forcefield.r_cut << "\n"
      << "delta_r = " << c.forcefield.delta_r << "\n"
      << "split_enabled = " << flag(c.forcefield.split_enabled) << "\n"
      << "nonsmooth_split_radius = " << c.forcefield.nonsmooth_split_radius << "\n"
      << "\n[scheme]\n"
      << "scheme = " << to_string(c.scheme.scheme) << "\n"
      << "h = " << c.scheme.h << "\n"
      << "delta_h = " << c.scheme.delta_h << "\n"
      << "mollify = " << flag(c.scheme.mollify) << "\n"
      << "\n[constraints]\n"
      << "tol_g = " << c.constraints.tol_g << "\n"
      << "tol_f = " << c.constraints.tol_f << "\n"
      << "max_iter = " << c.constraints.max_iter << "\n";
  return out.str();
}

ForceSplit force_split(const ForceField& forcefield) {
  auto ff = std::make_shared<const ForceField>(forcefield);
  auto bind = [ff](PotentialPart part) {
    return ForceProvider([ff, part](const Eigen::MatrixXd& x, Eigen::MatrixXd& f) {
      return ff->evaluate(x, part, &f);
    });
  };
  return {bind(PotentialPart::full), bind(PotentialPart::fast), bind(PotentialPart::slow)};
}

PotentialFn Simulation::potential() const {
  auto ff = std::make_shared<const ForceField>(forcefield);
  return [ff](const Eigen::MatrixXd& x) { return ff->energy(x); };
}

Simulation build_simulation(const ScenarioConfig& config) {
  config.validate();
  const Topology topology = build_water_topology(config.n_molecules, config.cell_edge,
                                                 config.geometry, {},
                                                 config.forcefield.truncation_mode);
  ReducedUnits units;
  units.beta = config.beta;
  ForceField forcefield(topology, config.forcefield);
  MechanicalSystem system =
      MechanicalSystem::from(topology, config.beads, units, config.constraints);
  Integrator integrator(config.scheme, system, force_split(forcefield), config.beads);
  RingPolymerState initial =
      initialize_state(topology, config.beads, units, config.temperature / config.beta, config.seed);
  return Simulation{topology, std::move(forcefield), std::move(system), std::move(integrator),
                    std::move(initial)};
}

namespace {

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config) {
  const Simulation sim = build_simulation(config);
  RunResult result = run(sim.initial, sim.integrator, config.n_steps, config.record_every,
                         sim.potential());
  auto& t = result.trace;
  t.set_meta("scenario", config.preset);
  t.set_meta("scheme", std::string(to_string(config.scheme.scheme)));
  t.set_meta("h", format_double(config.scheme.h));
  t.set_meta("delta_h", format_double(config.scheme.delta_h));
  t.set_meta("mollify", config.scheme.mollify ? "true" : "false");
  t.set_meta("beads", std::to_string(config.beads));
  t.set_meta("n_molecules", std::to_string(config.n_molecules));
  t.set_meta("truncation", std::string(to_string(config.forcefield.truncation_mode)));
  t.set_meta("seed", std::to_string(config.seed));
  t.set_meta("status", result.failed ? "failed" : "ok");
  if (result.failed) t.set_meta("reason", result.reason);
  return result;
}

void write_trace(std::ostream& out, const EnergyTrace& trace) {
  for (const auto& [k, v] : trace.metadata) {
    std::string flat = v;
    for (char& ch : flat) {
      if (ch == '\n' || ch == '\r') ch = ' ';
    }
    out << "# " << k << "=" << flat << "\n";
  }
  out << kTraceHeader << "\n";
  char buf[64];
  for (const auto& r : trace.rows) {
    out << r.step;
    for (double v : {r.time, r.kinetic, r.spring, r.potential, r.total, r.max_g, r.max_f}) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

EnergyTrace read_trace(std::istream& in) {
  EnergyTrace trace;
  std::string line;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#", 0) == 0) {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) trace.set_meta(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      continue;
    }
    if (!header) {
      if (line != kTraceHeader) {
        throw ValidationError("trace line " + std::to_string(line_no) + ": unexpected header '" +
                              line + "'");
      }
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 8) {
      throw ValidationError("trace line " + std::to_string(line_no) + ": expected 8 columns");
    }
    TraceRow r;
    try {
      r.step = std::stol(cells[0]);
      double* fields[] = {&r.time, &r.kinetic, &r.spring, &r.potential,
                          &r.total, &r.max_g, &r.max_f};
      for (int i = 0; i < 7; ++i) *fields[i] = std::stod(cells[i + 1]);
    } catch (const std::exception&) {
      throw ValidationError("trace line " + std::to_string(line_no) + ": malformed number");
    }
    if (!trace.rows.empty() && r.step <= trace.rows.back().step) {
      throw ValidationError("trace line " + std::to_string(line_no) +
                            ": step indices must increase");
    }
    trace.rows.push_back(r);
  }
  if (!header) throw ValidationError("trace has no header row");
  return trace;
}

void save_trace(const std::string& path, const EnergyTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write trace '" + path + "'");
  write_trace(out, trace);
}

EnergyTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open trace '" + path + "'");
  return read_trace(in);
}

}  // namespace rpmd
