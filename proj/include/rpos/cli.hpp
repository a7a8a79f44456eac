#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace rpos {

inline constexpr const char* kToolName = "rpos";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUndetermined = 2,
  kExitValidation = 3,
  kExitNumeric = 4,
};

struct RunConfig {
  std::string command;  // analyze | radius | chain | gibbs | verify
  std::string model_path;
  double tol = 1e-12;
  std::size_t m_max = 64;
  std::size_t depth = 1'000'000;
  std::size_t k_max = 400;
  std::uint64_t seed = 0;
  std::string output_path;  // empty: report goes to stdout

  // gibbs
  std::int64_t window_i = -5;
  std::int64_t window_j = 5;
  int left = 0;
  int right = 0;
  std::optional<std::int64_t> block_k;  // default: centre of the window
  std::optional<std::int64_t> block_l;

  // chain
  std::uint64_t mc_returns = 0;

  // verify
  std::size_t gibbs_instances = 20;
  std::uint64_t verify_mc_returns = 100'000;

  // Not part of the hash: results do not depend on it.
  std::size_t threads = 1;
};

/// Throws Validation for out-of-range fields.
void validate(const RunConfig& config);

/// FNV-1a over every result-affecting field and the model file bytes,
/// as 16 hex digits.
std::string config_hash(const RunConfig& config, const std::string& model_bytes);

/// Runs one command, writes the report (atomically when output_path is set)
/// and returns the exit code. Diagnostics go to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line: parses flags, reads RPOS_THREADS, calls run.
int cli_main(int argc, char** argv);

}  // namespace rpos
