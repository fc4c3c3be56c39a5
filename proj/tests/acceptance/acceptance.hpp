#pragma once

#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // wall-clock limit in seconds
};

/// Runs the selected criteria (all when `only` is empty), printing one
/// PASS/FAIL line per criterion to `out` as each finishes.
std::vector<CriterionResult> run(std::ostream& out, const std::set<int>& only = {});

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace acceptance
