#pragma once

// Deterministic property suite behind the `verify` command. Model checks
// run on the supplied matrix; the Gibbs checks draw random instances from
// the seed. No timings or addresses enter the results.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rpos/model_io.hpp"

namespace rpos {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity (usually a worst residual)
  double tolerance = 0.0;  // pass threshold on value
  std::string detail;
};

struct VerifyOptions {
  double tol = 1e-12;
  std::size_t m_max = 64;
  std::size_t depth = 1'000'000;
  std::size_t k_max = 400;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t gibbs_instances = 20;
  std::uint64_t mc_returns = 100'000;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
};

VerifyReport run_property_suite(const Model& model, const VerifyOptions& options);

}  // namespace rpos
