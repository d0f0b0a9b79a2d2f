#pragma once

// Subcommands of the `condense` tool. Each one turns an ExperimentConfig into
// a report; the exit code follows the report's checks.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace condense::cli {

inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int { kPass = 0, kOperational = 1, kViolation = 2 };

struct ExperimentConfig {
  std::string command;
  unsigned n = 4;
  unsigned ell = 3;
  unsigned t = 1;
  double eps = 0.1;
  std::string profile = "scaled";
  unsigned trials = 20;
  std::optional<std::uint64_t> rng_seed;
  std::string fn_file;
  std::string in_file;
  std::string out;
  std::string csv;
  unsigned workers = 1;
  unsigned random = 0;
  bool detail = false;

  // audit-condense
  std::string construction = "one-ell";
  unsigned good = 1;
  unsigned scale = 2;

  // condense
  std::string extractor = "sampled";
  double k = 6;
  unsigned m_bits = 10;
  double p = 1.0 / 16;
  double gamma = 0.5;
  double R = 0;  // 0: 4pN
  unsigned d = 3;
  std::uint64_t inner_key = 1;

  // cover
  double c0 = 1, c1 = 0.5, c2 = 0.25, delta = 0.5;

  // entropy
  std::optional<double> entropy_k;
};

nlohmann::json config_json(const ExperimentConfig& cfg);

struct RunResult {
  nlohmann::json report;
  int exit_code = kPass;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

RunResult cmd_audit_extract23(const ExperimentConfig& cfg);
RunResult cmd_audit_condense(const ExperimentConfig& cfg);
RunResult cmd_condense(const ExperimentConfig& cfg);
RunResult cmd_cover(const ExperimentConfig& cfg);
RunResult cmd_entropy(const ExperimentConfig& cfg);

/// Dispatch on cfg.command and stamp version, timing and the config echo.
RunResult run(const ExperimentConfig& cfg);

/// Drop the fields that legitimately differ between two identical runs.
nlohmann::json strip_timing(nlohmann::json report);

std::string csv_text(const RunResult& r);

/// Full command-line entry point. Reports go to --out or `out`; errors to `err`.
int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace condense::cli
