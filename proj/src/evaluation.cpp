#include "gazecomp/evaluation.hpp"

#include <algorithm>
#include <sstream>

#include "gazecomp/config.hpp"
#include "gazecomp/error.hpp"

namespace gazecomp {

namespace {

void check_shapes(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred) {
  if (gold.size() != pred.size()) {
    throw DataError("evaluation: " + std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) +
                    " predicted sentences");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw DataError("evaluation: sentence " + std::to_string(i) + " has " + std::to_string(gold[i].size()) +
                      " gold vs " + std::to_string(pred[i].size()) + " predicted labels");
    }
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SummaryMetrics summary_metrics(std::span<const std::vector<std::string>> gold,
                               std::span<const std::vector<std::string>> pred) {
  check_shapes(gold, pred);
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t gold_del = 0;
  std::size_t pred_del = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      ++total;
      correct += gold[i][t] == pred[i][t];
      gold_del += gold[i][t] == kDel;
      pred_del += pred[i][t] == kDel;
    }
  }
  return {ratio(correct, total), ratio(pred_del, total), ratio(gold_del, total)};
}

EvalReport token_f1(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred,
                    std::string_view positive_class) {
  check_shapes(gold, pred);
  EvalReport r;
  r.positive_class = std::string(positive_class);
  r.sentences = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      const bool g = gold[i][t] == positive_class;
      const bool p = pred[i][t] == positive_class;
      if (g && p) {
        ++r.counts.tp;
      } else if (p) {
        ++r.counts.fp;
      } else if (g) {
        ++r.counts.fn;
      } else {
        ++r.counts.tn;
      }
    }
  }
  r.precision = ratio(r.counts.tp, r.counts.tp + r.counts.fp);
  r.recall = ratio(r.counts.tp, r.counts.tp + r.counts.fn);
  // 2TP / (2TP + FP + FN) equals 2PR / (P + R) and is exact for small counts.
  r.f1 = r.counts.tp == 0 ? 0.0
                          : 2.0 * static_cast<double>(r.counts.tp) /
                                static_cast<double>(2 * r.counts.tp + r.counts.fp + r.counts.fn);
  const auto summary = summary_metrics(gold, pred);
  r.accuracy = summary.accuracy;
  r.predicted_deletion_rate = summary.predicted_deletion_rate;
  r.gold_deletion_rate = summary.gold_deletion_rate;
  return r;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "sentences          " << r.sentences << '\n'
     << "tokens             " << r.counts.total() << '\n'
     << "positive class     " << r.positive_class << '\n'
     << "precision          " << r.precision << '\n'
     << "recall             " << r.recall << '\n'
     << "F1                 " << r.f1 << '\n'
     << "accuracy           " << r.accuracy << '\n'
     << "gold deletion rate " << r.gold_deletion_rate << '\n'
     << "pred deletion rate " << r.predicted_deletion_rate << '\n'
     << "TP FP FN TN        " << r.counts.tp << ' ' << r.counts.fp << ' ' << r.counts.fn << ' ' << r.counts.tn
     << '\n';
  return os.str();
}

std::string report_record_header() {
  return "positive\tsentences\ttokens\tprecision\trecall\tf1\taccuracy\tgold_del_rate\tpred_del_rate\ttp\tfp\tfn\ttn";
}

std::string format_report_record(const EvalReport& r) {
  std::ostringstream os;
  os << r.positive_class << '\t' << r.sentences << '\t' << r.counts.total() << '\t' << format_double(r.precision)
     << '\t' << format_double(r.recall) << '\t' << format_double(r.f1) << '\t' << format_double(r.accuracy) << '\t'
     << format_double(r.gold_deletion_rate) << '\t' << format_double(r.predicted_deletion_rate) << '\t'
     << r.counts.tp << '\t' << r.counts.fp << '\t' << r.counts.fn << '\t' << r.counts.tn;
  return os.str();
}

}  // namespace gazecomp
