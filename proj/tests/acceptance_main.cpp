// One PASS/FAIL line per criterion; exit status 1 when any fails.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "geobeam/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  int failed = 0;
  geobeam::run_acceptance(ids, [&](const geobeam::CriterionResult& r) {
    std::cout << geobeam::format_result(r) << std::endl;
    if (!r.pass) ++failed;
  });
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
