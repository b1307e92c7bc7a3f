#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace seqcd {

struct CriterionResult {
  std::string id;         // e.g. "4a"
  std::string name;
  std::string tolerance;  // the pinned pass condition, printed on every run
  std::string detail;     // measured values
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds, 0 = none
  bool passed = false;
};

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
};

// kraft, redundancy, oracle, error-bound, arl, slope, termination, log-ratio,
// optimality, reproducibility.
const std::vector<std::string>& suite_names();

// Throws InvalidArgument for an unknown suite name.
std::vector<CriterionResult> run_suite(const std::string& name, const VerifyOptions& opts = {});

// "PASS [id] name | tolerance | detail | 1.23 s"
void print_result(std::ostream& os, const CriterionResult& r);

}  // namespace seqcd
