#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rpmd/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constrained ring-polymer dynamics with trigonometric integrators"};
  app.require_subcommand(1);

  rpmd::RunArgs run_args;
  std::string out_path;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run a scenario config and write its energy trace");
  run->add_option("--config", run_args.config_path, "scenario config file")->required();
  auto* out_opt = run->add_option("--out", out_path, "trace CSV path");
  auto* seed_opt = run->add_option("--seed", seed, "override scenario.seed");

  std::vector<std::string> traces;
  std::string csv_path;
  auto* analyze = app.add_subcommand("analyze", "drift and energy-error metrics of trace files");
  analyze->add_option("traces", traces, "trace CSV files")->required();
  auto* csv_opt = analyze->add_option("--csv", csv_path, "also write the table as CSV");

  bool inject = false;
  auto* selftest = app.add_subcommand("selftest", "fast invariant checks");
  selftest->add_flag("--inject-chat-fault", inject, "flip the sign of Chat (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? rpmd::kExitOk : rpmd::kExitValidation;
  }

  try {
    if (*run) {
      if (*out_opt) run_args.out_path = out_path;
      if (*seed_opt) run_args.seed = seed;
      return rpmd::run_command(run_args, std::cout, std::cerr);
    }
    if (*analyze) {
      std::optional<std::string> csv;
      if (*csv_opt) csv = csv_path;
      return rpmd::analyze_command(traces, csv, std::cout, std::cerr);
    }
    return rpmd::selftest_command(inject, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return rpmd::kExitInternal;
  }
}
