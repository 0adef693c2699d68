#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tdnn {

struct SuiteResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  std::string detail;  // counterexample on failure
};

struct VerifyOptions {
  std::uint64_t seed = 20240817;
  // Deliberately breaks the metric used by the axiom suites (drops an
  // absolute value, i.e. flips the sign of negative differences) so the
  // triangle-inequality check must fail. A harness for testing the harness.
  bool sabotage_metric = false;
};

std::vector<SuiteResult> run_verification(const VerifyOptions& options);

}  // namespace tdnn
