#pragma once

// Randomized invariant suite: random problems and configurations with
// beta1 < sqrt(beta2) and m_init = 0, checked step by step with
// verify_invariants, plus an exact SignSGD check (beta1 = beta2 = 0,
// eps = 0) and a bitwise determinism replay of every trial.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "adamlab/analysis.hpp"

namespace adamlab {

struct SuiteFailure {
  std::size_t trial = 0;
  std::string check;  // invariant quantity, "signsgd" or "replay"
  std::string detail;
};

struct SuiteResult {
  std::size_t trials = 0;
  std::uint64_t steps_checked = 0;
  std::uint64_t invariant_violations = 0;
  std::uint64_t signsgd_mismatches = 0;
  std::uint64_t replay_mismatches = 0;
  std::vector<SuiteFailure> failures;  // first few, for reporting

  bool ok() const {
    return invariant_violations == 0 && signsgd_mismatches == 0 && replay_mismatches == 0;
  }
};

SuiteResult run_invariant_suite(std::size_t trials, std::uint64_t steps, std::uint64_t seed);

}  // namespace adamlab
