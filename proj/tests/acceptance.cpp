// Runs every acceptance suite and prints one PASS/FAIL line per criterion.
// Usage: acceptance [suite...]   (default: all suites)
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "seqcd/rng.hpp"
#include "seqcd/verify.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> suites(argv + 1, argv + argc);
  if (suites.empty()) suites = seqcd::suite_names();

  const seqcd::VerifyOptions opts;
  std::cout << "# acceptance seed=" << opts.seed << " rng=" << seqcd::Rng::kName << '\n';
  int passed = 0;
  int failed = 0;
  for (const auto& suite : suites) {
    try {
      for (const auto& r : seqcd::run_suite(suite, opts)) {
        seqcd::print_result(std::cout, r);
        std::cout.flush();
        (r.passed ? passed : failed) += 1;
      }
    } catch (const std::exception& e) {
      std::cout << "FAIL [" << suite << "] suite aborted: " << e.what() << '\n';
      ++failed;
    }
  }
  std::cout << "# " << passed << " passed, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}
