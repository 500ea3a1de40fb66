#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rpmd/commands.hpp"
#include "rpmd/scenario.hpp"

using namespace rpmd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rpmd_unit_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("presets") {
  const ScenarioConfig t2 = preset_config("table2");
  CHECK(t2.n_molecules == 8);
  CHECK(t2.beads == 16);
  CHECK(t2.forcefield.truncation_mode == TruncationMode::none);
  const ScenarioConfig t3 = preset_config("table3");
  CHECK(t3.beads == 8);
  CHECK(t3.forcefield.truncation_mode == TruncationMode::nearest_image);
  CHECK(t3.scheme.scheme == Scheme::rattle_i);
  CHECK(t3.scheme.delta_h == doctest::Approx(t3.scheme.h / 10));
  const ScenarioConfig t4 = preset_config("table4");
  CHECK(t4.n_molecules == 27);
  CHECK(t4.beads == 4);
  CHECK(t4.forcefield.r_cut == 8.0);
  CHECK(t4.forcefield.delta_r == 4.5);
  CHECK(preset_config("fig1").scheme.h == 0.125);
  CHECK(preset_config("fig3").forcefield.nonsmooth_split_radius > 0.0);
  CHECK_THROWS_AS(preset_config("table9"), ValidationError);
}

TEST_CASE("config round trip") {
  for (const char* name : {"custom", "table2", "table3", "table4", "fig1", "fig3"}) {
    ScenarioConfig c = preset_config(name);
    c.seed = 987654321987654321ULL;
    c.scheme.h = 0.1 / 3.0;
    c.output = "out/trace.csv";
    if (c.scheme.scheme == Scheme::mts || c.scheme.scheme == Scheme::rattle_i) c.scheme.delta_h = c.scheme.h / 4;
    const ScenarioConfig back = parse_config(serialize_config(c));
    CAPTURE(name);
    CHECK(back == c);
  }
}

TEST_CASE("config overrides apply on top of the preset regardless of order") {
  const ScenarioConfig c = parse_config(
      "[scheme]\nh = 0.05   # larger step\n\n[scenario]\npreset = table2\nn_steps = 12\n");
  CHECK(c.preset == "table2");
  CHECK(c.scheme.h == 0.05);
  CHECK(c.beads == 16);
  CHECK(c.n_steps == 12);
}

TEST_CASE("config errors name the line and key") {
  auto err = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::make_pair(e.line(), e.key() + " | " + e.what());
    }
    return std::make_pair(-1, std::string());
  };
  auto [l1, m1] = err("[scenario]\nn_steps = 10\nfrobnicate = 2\n");
  CHECK(l1 == 3);
  CHECK(m1.find("scenario.frobnicate") != std::string::npos);
  auto [l2, m2] = err("[scheme]\nh = fast\n");
  CHECK(l2 == 2);
  CHECK(m2.find("scheme.h") != std::string::npos);
  auto [l3, m3] = err("[scenario]\npreset = table7\n");
  CHECK(l3 == 2);
  CHECK(m3.find("table7") != std::string::npos);
  auto [l4, m4] = err("[system]\ntruncation = ewald\n");
  CHECK(l4 == 2);
  CHECK(err("[system]\nbeads = 0\n").first == 0);
  CHECK(err("just words\n").first == 1);
}

TEST_CASE("trace CSV round trip and schema") {
  EnergyTrace t;
  t.set_meta("scheme", "molly_r");
  t.set_meta("h", "0.075");
  for (int i = 0; i < 3; ++i) {
    TraceRow r;
    r.step = i * 5;
    r.time = 0.1 / 3.0 * i;
    r.kinetic = 1.0 / 7.0 + i;
    r.spring = 2.0 / 3.0;
    r.potential = -1e-300;
    r.total = r.kinetic + r.spring + r.potential;
    r.max_g = 1e-17;
    r.max_f = 3.3e-12;
    t.rows.push_back(r);
  }
  std::ostringstream out;
  write_trace(out, t);
  const std::string text = out.str();
  CHECK(text.find(std::string("\n") + kTraceHeader + "\n") != std::string::npos);
  std::istringstream in(text);
  const EnergyTrace back = read_trace(in);
  CHECK(back.meta("scheme") == "molly_r");
  REQUIRE(back.rows.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.rows[i].step == t.rows[i].step);
    CHECK(back.rows[i].time == t.rows[i].time);
    CHECK(back.rows[i].kinetic == t.rows[i].kinetic);
    CHECK(back.rows[i].potential == t.rows[i].potential);
    CHECK(back.rows[i].max_f == t.rows[i].max_f);
  }
  std::istringstream bad("step,time\n1,2\n");
  CHECK_THROWS_AS(read_trace(bad), ValidationError);
}

TEST_CASE("golden 100-step trace") {
  ScenarioConfig c = preset_config("table2");
  c.n_steps = 100;
  const RunResult r = run_scenario(c);
  std::ostringstream out;
  write_trace(out, r.trace);
  const fs::path golden = fs::path(RPMD_TEST_DATA_DIR) / "golden_table2_100.csv";
  REQUIRE(fs::exists(golden));
  CHECK(out.str() == slurp(golden));
}

TEST_CASE("run command writes a full trace and a summary") {
  const fs::path cfg = scratch("t2.cfg"), trace = scratch("t2.csv");
  write_file(cfg, "[scenario]\npreset = table2\nn_steps = 1000\n");
  std::ostringstream out, err;
  CHECK(run_command({cfg.string(), trace.string(), {}}, out, err) == kExitOk);
  const EnergyTrace t = load_trace(trace.string());
  CHECK(t.rows.size() == 1001);
  for (const char* key : {"drift = ", "noise = ", "delta_e = ", "delta_e_r = "}) {
    CHECK(out.str().find(key) != std::string::npos);
  }
  CHECK(fs::exists(trace.string() + ".summary"));

  const fs::path again = scratch("t2_again.csv");
  write_file(cfg, "[scenario]\npreset = table2\nn_steps = 50\n");
  CHECK(run_command({cfg.string(), trace.string(), {}}, out, err) == kExitOk);
  CHECK(run_command({cfg.string(), again.string(), {}}, out, err) == kExitOk);
  CHECK(slurp(trace) == slurp(again));
  CHECK(run_command({cfg.string(), again.string(), 99}, out, err) == kExitOk);
  CHECK(slurp(trace) != slurp(again));
}

TEST_CASE("run command exit codes") {
  std::ostringstream out, err;
  const fs::path bad = scratch("bad.cfg"), trace = scratch("bad.csv");
  write_file(bad, "[scenario]\npreset = nope\n");
  CHECK(run_command({bad.string(), trace.string(), {}}, out, err) == kExitValidation);
  CHECK(run_command({scratch("missing.cfg").string(), trace.string(), {}}, out, err) == kExitValidation);

  const fs::path fig1 = scratch("fig1.cfg"), ftrace = scratch("fig1.csv");
  write_file(fig1, "[scenario]\npreset = fig1\n");
  std::ostringstream err2;
  const int code = run_command({fig1.string(), ftrace.string(), {}}, out, err2);
  CHECK(code == kExitStepperFailure);
  CHECK(err2.str().find("constraint non-convergence") != std::string::npos);
  const EnergyTrace partial = load_trace(ftrace.string());
  CHECK(partial.meta("status") == "failed");
  CHECK(partial.rows.size() >= 1);
}

TEST_CASE("analyze command") {
  auto make = [](const std::string& name, const std::string& scheme, double h, double slope) {
    EnergyTrace t;
    t.set_meta("scheme", scheme);
    t.set_meta("h", std::to_string(h));
    t.set_meta("delta_h", "0");
    for (int i = 0; i < 5; ++i) {
      TraceRow r;
      r.step = i;
      r.time = i * h;
      r.kinetic = 4.0;
      r.total = 10.0 + slope * r.time;
      t.rows.push_back(r);
    }
    const fs::path p = scratch(name);
    save_trace(p.string(), t);
    return p.string();
  };
  const std::string a = make("b.csv", "rattle", 0.001, 0.0);
  const std::string b = make("a.csv", "impulse_r", 0.05, 2.0);
  const std::string c = make("c.csv", "impulse_r", 0.02, 0.0);
  std::ostringstream out, err;
  const fs::path csv = scratch("table.csv");
  CHECK(analyze_command({a, b, c}, csv.string(), out, err) == kExitOk);
  const std::string table = slurp(csv);
  const auto pc = table.find(c), pb = table.find(b), pa = table.find(a);
  CHECK(pc < pb);
  CHECK(pb < pa);
  CHECK(table.find("rattle,0.001,0,0.000000e+00,0.000000e+00,0.000000e+00,0.000000e+00") != std::string::npos);
  CHECK(table.find("impulse_r,0.05,0,5.000000e-01,") != std::string::npos);
  CHECK(analyze_command({scratch("nothing.csv").string()}, {}, out, err) == kExitValidation);
}

TEST_CASE("selftest passes and catches an injected Chat sign error") {
  const auto clean = run_selftest(false);
  for (const auto& c : clean) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
  const auto faulty = run_selftest(true);
  bool free_flow_failed = false;
  for (const auto& c : faulty) {
    if (c.name == "free-flow exactness") free_flow_failed = !c.passed;
  }
  CHECK(free_flow_failed);
}
