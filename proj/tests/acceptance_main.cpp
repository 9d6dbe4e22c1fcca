// Runs the numbered acceptance criteria and prints one line per criterion.
// Usage: acceptance [id ...]   (default: all)

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "ans/acceptance.hpp"

int main(int argc, char** argv) {
  namespace acc = ans::acceptance;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (int i = 1; i <= static_cast<int>(acc::criteria().size()); ++i) ids.push_back(i);
  }
  int failed = 0;
  for (int id : ids) {
    const acc::CriterionResult r = acc::run_criterion(id);
    std::cout << acc::result_line(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed")
            << std::endl;
  return failed ? 1 : 0;
}
