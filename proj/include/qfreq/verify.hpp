#pragma once

// Built-in invariant suite run by `qfreq verify`.

#include <string>
#include <vector>

namespace qfreq {

struct CheckResult {
  std::string name;
  bool passed;
  double value;      // measured error or deviation
  double tolerance;
  std::string detail;
};

struct VerifyOptions {
  // Test hook: added to one entry of the bin unitary before the unitarity check.
  double unitary_perturbation = 0.0;
};

std::vector<CheckResult> run_invariant_suite(const VerifyOptions& options = {});

/// Fixed-width table, one row per check, followed by a summary line.
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace qfreq
