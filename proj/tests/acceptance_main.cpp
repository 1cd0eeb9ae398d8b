// Prints one PASS/FAIL/SKIP line per release criterion; non-zero exit if any
// binding criterion fails. `--data DIR` enables the reproduction check,
// `--only N` runs a single criterion.
#include <cstring>
#include <iostream>
#include <string>

#include "gazecomp/log.hpp"
#include "gazecomp/selftest/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace gazecomp::selftest;
  AcceptanceOptions options;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--skip-slow") == 0) {
      options.skip_slow = true;
    } else if (std::strcmp(argv[i], "--data") == 0 && i + 1 < argc) {
      options.reproduction_data = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else {
      std::cerr << "usage: gazecomp_acceptance [--skip-slow] [--data DIR] [--only N]\n";
      return 1;
    }
  }
  gazecomp::set_log_stream(nullptr);
  std::vector<CriterionResult> results;
  if (only > 0) {
    for (const auto& c : acceptance_criteria()) {
      if (c.id != only) continue;
      results.push_back(run_criterion(c, options));
      std::cout << format_result_line(results.back()) << std::endl;
    }
  } else {
    results = run_acceptance(options, std::cout);
  }
  return all_passed(results) ? 0 : 1;
}
