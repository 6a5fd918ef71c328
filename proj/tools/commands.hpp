#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "badmarket/config.hpp"

namespace badmarket::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kNoConvergence = 2, kInputError = 3 };

struct GlobalOptions {
  /// Verification tolerance; also caps the solver's own tolerances.
  double tol = 1e-8;
  std::uint64_t seed = SolverConfig{}.seed;
  int restarts = SolverConfig{}.restarts;
  std::string out;
  std::string quota;
};

struct CommandOutcome {
  int exit_code = kOk;
  /// Text for stdout.
  std::string summary;
  /// Text for stderr.
  std::string diagnostics;
  std::vector<std::string> artifacts;
};

SolverConfig solver_config(const GlobalOptions& opts);

CommandOutcome cmd_solve(const std::string& economy_path, const GlobalOptions& opts);
CommandOutcome cmd_verify(const std::string& economy_path, const std::string& certificate_path,
                          const GlobalOptions& opts);
CommandOutcome cmd_quota(const std::string& economy_path, const GlobalOptions& opts);

struct WelfareOptions {
  /// Two certificate paths.
  std::vector<std::string> compare;
  /// Certificate to search around.
  std::string search;
  long samples = 100000;
  std::string csv;
};

CommandOutcome cmd_welfare(const std::string& economy_path, const WelfareOptions& wopts, const GlobalOptions& opts);

struct FamilyOptions {
  std::string family;
  std::string ns;
  bool runtime = false;
};

CommandOutcome cmd_family(const FamilyOptions& fopts, const GlobalOptions& opts);

struct OracleOptions {
  /// hara, garbage or one-agent.
  std::string family;
  int n = 1;
  std::string economy_out;
};

CommandOutcome cmd_oracle(const OracleOptions& oopts, const GlobalOptions& opts);

/// Parses argv, dispatches, prints the outcome and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace badmarket::cli
