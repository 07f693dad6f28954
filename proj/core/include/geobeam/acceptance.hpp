#pragma once

#include <functional>
#include <string>
#include <vector>

namespace geobeam {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool check = false;    // numerical criterion met
  bool pass = false;     // check and within budget
  std::string detail;
  double seconds = 0.0;  // wall clock
  double budget = 0.0;
};

struct CriterionInfo {
  int id;
  const char* name;
  double budget;  // seconds
};

const std::vector<CriterionInfo>& acceptance_criteria();

// Runs one criterion. Exceptions are caught and reported as failures.
CriterionResult run_criterion(int id);

// Runs the given criteria in order (all when empty); `done` is called after each one.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {},
                                            const std::function<void(const CriterionResult&)>& done = {});

// "PASS AC<id> <name>: <detail> (<s>s / <budget>s)"
std::string format_result(const CriterionResult& r);

}  // namespace geobeam
