#ifndef GAZECOMP_EVALUATION_HPP
#define GAZECOMP_EVALUATION_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazecomp/compression_data.hpp"

namespace gazecomp {

using LabelSequences = std::vector<std::vector<std::string>>;

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

struct EvalReport {
  std::string positive_class;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double predicted_deletion_rate = 0.0;
  double gold_deletion_rate = 0.0;
  std::size_t sentences = 0;
  ConfusionCounts counts;
};

struct SummaryMetrics {
  double accuracy = 0.0;
  double predicted_deletion_rate = 0.0;
  double gold_deletion_rate = 0.0;
};

/// Micro-averaged over every token of the corpus. Zero denominators give 0.
/// Throws DataError naming the first sentence whose lengths disagree.
EvalReport token_f1(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred,
                    std::string_view positive_class = kKeep);

SummaryMetrics summary_metrics(std::span<const std::vector<std::string>> gold,
                               std::span<const std::vector<std::string>> pred);

/// Multi-line report for people.
std::string format_report(const EvalReport& report);

/// Header and one tab-separated record matching it.
std::string report_record_header();
std::string format_report_record(const EvalReport& report);

}  // namespace gazecomp

#endif  // GAZECOMP_EVALUATION_HPP
