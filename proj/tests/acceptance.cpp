// One line per acceptance criterion; exit status is the number of failures.

#include <cstdio>

#include "mimocov/validation.hpp"

int main() {
  using namespace mimocov::validation;
  int failed = 0;
  for (const auto& r : run_acceptance_suite()) {
    std::printf("criterion %2d  %s  %-52s %7.2fs  %s\n", r.criterion, r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.seconds, r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed;
}
