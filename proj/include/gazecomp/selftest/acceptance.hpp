#ifndef GAZECOMP_SELFTEST_ACCEPTANCE_HPP
#define GAZECOMP_SELFTEST_ACCEPTANCE_HPP

// The release checks: each criterion runs on synthetic data with its
// tolerance and runtime budget fixed here.

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gazecomp::selftest {

enum class Verdict { pass, fail, skip };

struct CriterionResult {
  int id = 0;
  std::string name;
  Verdict verdict = Verdict::fail;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  bool binding = true;
};

struct AcceptanceOptions {
  /// Skip criteria whose budget exceeds a minute (7 and 9).
  bool skip_slow = false;
  /// Directory with `train.conll`, `test.conll`, `ccg.conll` and gaze files
  /// `*.conll` under `gaze/` for the non-binding reproduction run.
  std::optional<std::filesystem::path> reproduction_data;
  /// Scratch space for files written by the determinism check.
  std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "gazecomp-selftest";
};

struct Criterion {
  int id = 0;
  std::string name;
  double budget_seconds = 0.0;
  bool slow = false;
  bool binding = true;
  /// Returns (passed, detail); runtime is measured by the caller.
  std::function<std::pair<bool, std::string>(const AcceptanceOptions&)> run;
};

std::vector<Criterion> acceptance_criteria();

/// Runs one criterion, timing it; exceeding the budget is a failure.
CriterionResult run_criterion(const Criterion& criterion, const AcceptanceOptions& options);

/// Runs every criterion, printing one line per criterion as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

/// True when no binding criterion failed.
bool all_passed(const std::vector<CriterionResult>& results);

std::string format_result_line(const CriterionResult& result);

// Individual checks, exposed for unit tests.
struct ScopeIsolationResult {
  bool cascaded_upper_unchanged = false;
  bool multitask_upper_changed = false;
  std::size_t steps = 0;
};
ScopeIsolationResult check_scope_isolation(std::size_t steps, std::uint64_t seed);

struct TrendResult {
  std::vector<double> baseline_f1;
  std::vector<double> cascaded_f1;
};
TrendResult run_multitask_trend(std::size_t seeds);

}  // namespace gazecomp::selftest

#endif  // GAZECOMP_SELFTEST_ACCEPTANCE_HPP
