// Acceptance suite: every criterion at its pinned tolerance, one line each.

#include <fmt/format.h>

#include <algorithm>
#include <iostream>
#include <numeric>
#include <vector>

#include "mislab/validation.hpp"

int main() {
  std::vector<int> ids(mislab::kCriterionCount);
  std::iota(ids.begin(), ids.end(), 1);
  const auto results = mislab::run_validation(ids, mislab::ValidationOptions{}, &std::cout);
  const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  fmt::print("acceptance: {} / {} criteria passed\n", passed, results.size());
  return passed == static_cast<long>(results.size()) ? 0 : 1;
}
