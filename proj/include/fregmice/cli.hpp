#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fregmice {

struct CommandConfig {
  std::string command;  // impute, fit, pool, simulate, diagnose, report, generate
  std::filesystem::path data;
  std::filesystem::path grids;
  std::filesystem::path spec;
  std::filesystem::path out = ".";
  std::filesystem::path run;                 // diagnose: impute output directory
  std::vector<std::filesystem::path> inputs; // fit: data files; pool: fit files
  std::optional<std::uint64_t> seed;
  std::optional<int> M;
  std::optional<int> V;
  std::optional<int> replications;
  std::optional<int> n;
  std::vector<std::string> methods;
  std::string group_by;
  bool complete_cases = false;
  double level = 0.95;
  bool student_t = false;
  int threads = 0;
  int verbosity = 0;
};

/// Runs one command. Failures print `error:<category>:<detail>` on `err` and
/// return a nonzero status (2 for I/O failures).
int run_command(const CommandConfig& config, std::ostream& out, std::ostream& err);

}  // namespace fregmice
