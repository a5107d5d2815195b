#pragma once

#include <nrep/io.h>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace nrep::cli {

inline constexpr const char *version = "nrep 1.0.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_parse = 2,
  exit_non_convergence = 3,
  exit_ill_conditioned = 4,
};

/// Everything needed to reproduce a run. Echoed into every report.
struct RunManifest {
  std::string command; // purify fit assemble decompose cost density synthesize
  std::map<std::string, std::string> inputs;
  io::json options = io::json::object();
  std::uint64_t seed{0};
  std::string version{cli::version};
  std::string out_dir{"."};

  io::json to_json() const;
  static RunManifest from_json(const io::json &j);
};

struct RunResult {
  int exit_code{exit_ok};
  io::json report;
};

/// Dispatch a manifest to the library. Output files and report.json go to
/// manifest.out_dir. Module errors become an error report, never an exception.
RunResult run(const RunManifest &manifest);

int exit_code_for(const std::exception &e);

/// Replace NaN/Inf numbers by their string spelling.
io::json sanitize(io::json j);

/// Command-line entry point.
int main(int argc, char **argv, std::ostream &out, std::ostream &err);

} // namespace nrep::cli
