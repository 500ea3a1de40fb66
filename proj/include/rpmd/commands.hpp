#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rpmd {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitStepperFailure = 2, kExitInternal = 3 };

struct RunArgs {
  std::string config_path;
  std::optional<std::string> out_path;  // overrides scenario.output; default trace.csv
  std::optional<std::uint64_t> seed;
};

// Writes the trace and a `<trace>.summary` key-value block, echoes the summary to out.
int run_command(const RunArgs& args, std::ostream& out, std::ostream& err);

// One row per trace (scheme, h, delta_h, drift, noise, delta_e, delta_e_r),
// sorted by scheme, then h, then path. csv_path also receives the rows.
int analyze_command(const std::vector<std::string>& traces, const std::optional<std::string>& csv_path,
                    std::ostream& out, std::ostream& err);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// inject_chat_fault flips the sign of the cached Chat before the free-flow checks.
std::vector<SelftestCheck> run_selftest(bool inject_chat_fault);

int selftest_command(bool inject_chat_fault, std::ostream& out);

}  // namespace rpmd
