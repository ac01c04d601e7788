#pragma once

// Statistical and structural acceptance checks over the built-in experiments.
// Each check has a fixed seed, a fixed tolerance and a wall-clock budget; a
// check passes only if its condition holds and it finished within budget.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mislab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct ValidationOptions {
  std::uint64_t seed = 0x4d49534c4142ULL;
  unsigned threads = 1;
};

inline constexpr int kCriterionCount = 9;

/// Criteria relevant to built-in example 1 or 2.
std::vector<int> criteria_for_example(int example);

CriterionResult run_criterion(int id, const ValidationOptions& opts);

/// Runs `ids` in order, printing one line per criterion to `out` when non-null.
std::vector<CriterionResult> run_validation(std::span<const int> ids, const ValidationOptions& opts,
                                            std::ostream* out);

std::string format_result(const CriterionResult& r);

}  // namespace mislab
