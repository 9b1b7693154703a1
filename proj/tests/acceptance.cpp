#include <cstdio>
#include <iostream>
#include <thread>

#include "mfwave/acceptance.hpp"

int main() {
  mfwave::AcceptanceSuite suite(mfwave::default_run_config(), std::thread::hardware_concurrency());
  const auto report = suite.run({}, [](const mfwave::CriterionResult& r) {
    std::cout << mfwave::format_result_line(r) << std::endl;
  });
  const bool ok = report.blocking_passed();
  std::cout << (ok ? "acceptance: PASS" : "acceptance: FAIL") << std::endl;
  return ok ? 0 : 1;
}
