#include "gazecomp/selftest/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "gazecomp/compression_data.hpp"
#include "gazecomp/evaluation.hpp"
#include "gazecomp/gaze.hpp"
#include "gazecomp/log.hpp"
#include "gazecomp/model.hpp"
#include "gazecomp/model_io.hpp"
#include "gazecomp/pipeline.hpp"
#include "gazecomp/selftest/oracles.hpp"
#include "gazecomp/selftest/synthetic.hpp"

namespace gazecomp::selftest {

namespace {

using Outcome = std::pair<bool, std::string>;

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

// ---- 1. gradient correctness ------------------------------------------------

Outcome gradient_correctness(const AcceptanceOptions&) {
  constexpr double kEpsilon = 1e-5;
  constexpr double kTolerance = 1e-4;
  std::vector<std::string> words;
  for (int i = 0; i < 19; ++i) words.push_back("w" + std::to_string(i));  // + UNK = 20

  std::ostringstream detail;
  bool ok = true;
  for (Architecture arch : {Architecture::multitask, Architecture::cascaded}) {
    ArchitectureConfig config;
    config.architecture = arch;
    config.layers = 2;
    config.hidden_size = 8;
    config.embedding_dim = 8;
    config.seed = 11;
    Model model = build_model(config, Vocabulary(words), {"N", "NP", "S", "S/NP"});
    std::mt19937_64 rng(5);
    std::vector<std::pair<std::string, Instance>> instances;
    for (const auto& task : model.tasks()) {
      Instance inst;
      for (int t = 0; t < 4; ++t) {
        inst.tokens.push_back(std::uniform_int_distribution<ad::Index>(0, model.vocab().size() - 1)(rng));
        inst.labels.push_back(
            std::uniform_int_distribution<ad::Index>(0, static_cast<ad::Index>(task.labels.size()) - 1)(rng));
      }
      instances.emplace_back(task.name, std::move(inst));
    }
    const auto report = check_gradients(model, instances, kEpsilon);
    ok = ok && report.max_rel_error < kTolerance;
    detail << architecture_name(arch) << " max_rel=" << fixed(report.max_rel_error, 3) << " over "
           << report.coordinates << " coords; ";
  }
  return {ok, detail.str()};
}

// ---- 2. cascaded scope isolation --------------------------------------------

std::vector<std::string> upper_parameter_names(const Model& model) {
  std::vector<std::string> names;
  for (const auto& p : model.parameters()) {
    const bool upper_layer = p.name.rfind("layer", 0) == 0 && p.name.rfind("layer0.", 0) != 0;
    const bool compression_head = p.name.rfind("head.compression.", 0) == 0;
    if (upper_layer || compression_head) names.push_back(p.name);
  }
  return names;
}

bool bitwise_equal(const ad::Tensor& a, const ad::Tensor& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data(), [](double x, double y) {
           return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
         });
}

}  // namespace

ScopeIsolationResult check_scope_isolation(std::size_t steps, std::uint64_t seed) {
  ConstituentCorpusSpec spec;
  spec.heads = 20;
  spec.compression_train = 10;
  spec.ccg_sentences = 20;
  spec.gaze_readers = 2;
  spec.gaze_sentences = 10;
  const auto corpus = make_constituent_corpus(spec, seed);

  ScopeIsolationResult result;
  result.steps = steps;
  for (Architecture arch : {Architecture::cascaded, Architecture::multitask}) {
    ArchitectureConfig config;
    config.architecture = arch;
    config.layers = 3;
    config.hidden_size = 8;
    config.embedding_dim = 8;
    config.seed = seed;
    ExperimentData data;
    data.compression_train = corpus.compression_train;
    data.ccg_train = corpus.ccg_train;
    data.gaze_train = corpus.gaze_train;
    Model model = build_experiment_model(config, data);
    const TaskDatasets sets = encode_experiment_data(model, data);

    const auto names = upper_parameter_names(model);
    std::vector<ad::Tensor> before;
    for (const auto& n : names) before.push_back(model.parameters().at(n).value);

    std::mt19937_64 rng(training_seed(seed));
    const std::string aux[] = {std::string(kCcgTask), std::string(kGazeTask)};
    for (std::size_t s = 0; s < steps; ++s) {
      const auto& task = model.task(aux[std::uniform_int_distribution<int>(0, 1)(rng)]);
      const auto& list = sets.at(task.name);
      const auto& inst = list[std::uniform_int_distribution<std::size_t>(0, list.size() - 1)(rng)];
      update_on(model, task, inst);
    }

    bool unchanged = true;
    for (std::size_t i = 0; i < names.size(); ++i) {
      unchanged = unchanged && bitwise_equal(before[i], model.parameters().at(names[i]).value);
    }
    if (arch == Architecture::cascaded) {
      result.cascaded_upper_unchanged = unchanged;
    } else {
      result.multitask_upper_changed = !unchanged;
    }
  }
  return result;
}

namespace {

Outcome scope_isolation(const AcceptanceOptions&) {
  const auto r = check_scope_isolation(100, 3);
  std::ostringstream detail;
  detail << "cascaded upper layers + compression head unchanged: " << (r.cascaded_upper_unchanged ? "yes" : "NO")
         << "; multitask control changed: " << (r.multitask_upper_changed ? "yes" : "NO");
  return {r.cascaded_upper_unchanged && r.multitask_upper_changed, detail.str()};
}

// ---- 3. gaze oracle equivalence ---------------------------------------------

Outcome gaze_oracle(const AcceptanceOptions&) {
  std::mt19937_64 rng(2016);
  std::size_t mismatches = 0;
  std::size_t partition_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto events = random_fixation_stream(rng, 30, 10);
    const auto oracle = brute_force_gaze(events);
    const auto fp = compute_first_pass(events);
    const auto regr = compute_regression(events);
    for (std::size_t w = 0; w < 10; ++w) {
      const auto get = [w](const std::map<std::size_t, std::uint64_t>& m) {
        auto it = m.find(w);
        return it == m.end() ? std::uint64_t{0} : it->second;
      };
      if (get(fp) != get(oracle.first_pass) || get(regr) != get(oracle.regression)) ++mismatches;
      if (get(fp) + get(regr) != get(oracle.total)) ++partition_failures;
    }
  }
  return {mismatches == 0 && partition_failures == 0,
          "1000 streams; mismatches=" + std::to_string(mismatches) +
              " partition failures=" + std::to_string(partition_failures)};
}

// ---- 4. binning correctness -------------------------------------------------

Outcome binning(const AcceptanceOptions&) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> mean_dist(50.0, 600.0);
  std::uniform_real_distribution<double> sd_dist(0.0, 300.0);
  std::size_t mismatches = 0;
  std::size_t zero_violations = 0;
  for (int i = 0; i < 10000; ++i) {
    ReaderStats stats;
    stats.mean = mean_dist(rng);
    stats.sd = i % 50 == 0 ? 0.0 : sd_dist(rng);
    double value = 0.0;
    switch (std::uniform_int_distribution<int>(0, 6)(rng)) {
      case 0: value = 0.0; break;
      case 1: value = stats.mean - stats.sd; break;
      case 2: value = stats.mean + stats.sd; break;
      case 3: value = stats.mean - 0.5 * stats.sd; break;
      case 4: value = stats.mean + 0.5 * stats.sd; break;
      default: value = std::uniform_real_distribution<double>(0.0, 1200.0)(rng); break;
    }
    if (value < 0.0) value = 1.0;
    const int bin = discretize_measure(value, stats);
    if (bin != bin_oracle(value, stats.mean, stats.sd)) ++mismatches;
    if ((bin == 0) != (value == 0.0)) ++zero_violations;
  }

  std::size_t monotonicity_violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ReaderStats stats;
    stats.mean = mean_dist(rng);
    stats.sd = sd_dist(rng);
    int previous = 1;
    for (double v = 0.5; v < 1500.0; v += 3.7) {
      const int bin = discretize_measure(v, stats);
      if (bin < previous) ++monotonicity_violations;
      previous = bin;
    }
  }

  const std::uint64_t example_values[] = {100, 200, 300, 400, 500};
  const auto stats = reader_stats("example", GazeMeasure::first_pass, example_values);
  const bool worked = discretize_measure(100, stats) == 1 && discretize_measure(250, stats) == 3 &&
                      discretize_measure(380, stats) == 4 && discretize_measure(500, stats) == 5;

  return {mismatches == 0 && zero_violations == 0 && monotonicity_violations == 0 && worked,
          "10000 triples; mismatches=" + std::to_string(mismatches) + " zero-bin violations=" +
              std::to_string(zero_violations) + " monotonicity violations=" + std::to_string(monotonicity_violations) +
              " worked example " + (worked ? "ok" : "FAILED")};
}

// ---- 5. label derivation ----------------------------------------------------

Outcome label_derivation(const AcceptanceOptions&) {
  std::mt19937_64 rng(7);
  std::size_t failures = 0;
  for (int i = 0; i < 500; ++i) {
    const auto pair = random_sentence_pair(rng, 12);
    const auto labeled = align_and_label(pair);
    const auto& labels = labeled.labels_for(kCompressionTask);
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (labels[k] == kKeep) kept.push_back(k);
    }
    std::vector<std::string> projection;
    for (auto k : kept) projection.push_back(pair.source[k]);
    const bool ok = kept.size() == brute_force_lcs_length(pair.source, pair.compression) &&
                    projection == pair.compression &&
                    kept == brute_force_leftmost_embedding(pair.source, pair.compression);
    failures += !ok;
  }

  SentencePair intel;
  intel.source = split_tokens(
      "Intel would be building car batteries , expanding its business beyond its core strength , the company said "
      "in a statement .");
  intel.compression = split_tokens("Intel would be building car batteries");
  const auto intel_labeled = align_and_label(intel);
  const auto& labels = intel_labeled.labels_for(kCompressionTask);
  bool intel_ok = labels.size() == intel.source.size();
  for (std::size_t k = 0; k < labels.size() && intel_ok; ++k) intel_ok = labels[k] == (k < 6 ? kKeep : kDel);

  return {failures == 0 && intel_ok,
          "500 pairs; failures=" + std::to_string(failures) + "; Intel example " + (intel_ok ? "ok" : "FAILED")};
}

// ---- 6. F1 oracle equivalence -----------------------------------------------

Outcome f1_oracle(const AcceptanceOptions&) {
  std::mt19937_64 rng(99);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto corpora = random_label_corpora(rng);
    const auto report = token_f1(corpora.gold, corpora.pred, kKeep);
    const auto counts = brute_force_confusion(corpora.gold, corpora.pred, std::string(kKeep));
    const bool ok = report.counts.tp == counts.tp && report.counts.fp == counts.fp && report.counts.fn == counts.fn &&
                    report.counts.tn == counts.tn && std::abs(report.f1 - f1_from_counts(counts)) < 1e-12;
    failures += !ok;
  }
  const LabelSequences gold = {{"KEEP", "DEL", "KEEP", "KEEP"}};
  const LabelSequences pred = {{"KEEP", "KEEP", "DEL", "KEEP"}};
  const auto hand = token_f1(gold, pred);
  const bool hand_ok = hand.counts.tp == 2 && hand.counts.fp == 1 && hand.counts.fn == 1 && hand.f1 == 2.0 / 3.0;
  return {failures == 0 && hand_ok, "1000 corpora; failures=" + std::to_string(failures) + "; hand case F1=" +
                                        fixed(hand.f1, 17) + (hand_ok ? "" : " FAILED")};
}

// ---- 7. capacity / overfit --------------------------------------------------

double training_accuracy(Model& model, std::span<const LabeledSentence> corpus) {
  LabelSequences gold;
  for (const auto& s : corpus) gold.push_back(s.labels_for(kCompressionTask));
  return summary_metrics(gold, predict_corpus(model, corpus)).accuracy;
}

Outcome overfit(const AcceptanceOptions&) {
  ConstituentCorpusSpec spec;
  spec.heads = 40;
  spec.compression_train = 32;
  spec.ccg_sentences = 32;
  auto corpus = make_constituent_corpus(spec, 17);
  // The CCG task uses the same 32 sentences.
  for (std::size_t i = 0; i < corpus.ccg_train.size(); ++i) {
    corpus.ccg_train[i].tokens = corpus.compression_train[i].tokens;
    std::vector<std::string> tags;
    for (const auto& t : corpus.ccg_train[i].tokens) tags.emplace_back(t[0] == 'm' ? "B" : t[0] == 'h' ? "H" : "I");
    corpus.ccg_train[i].labels[std::string(kCcgTask)] = tags;
  }

  ArchitectureConfig config;
  config.architecture = Architecture::baseline;
  config.layers = 3;
  config.hidden_size = 16;
  config.embedding_dim = 16;
  config.finetune_embeddings = true;
  config.learning_rate = 0.05;
  config.clip_norm = 5.0;
  config.iterations = 300;
  config.seed = 1;

  ExperimentData data;
  data.compression_train = corpus.compression_train;
  data.ccg_train = corpus.ccg_train;
  Model model = build_experiment_model(config, data);
  const TaskDatasets sets = encode_experiment_data(model, data);

  double accuracy = 0.0;
  int epochs = 0;
  TrainOptions options;
  options.on_epoch = [&](const EpochLog& log) {
    epochs = log.epoch;
    accuracy = training_accuracy(model, corpus.compression_train);
    return accuracy < 0.99;
  };
  const auto result = train(model, sets, options);
  const bool ok = !result.aborted && accuracy >= 0.99;
  return {ok, "token accuracy " + fixed(accuracy) + " after " + std::to_string(epochs) + " epoch(s)"};
}

// ---- 8. determinism ---------------------------------------------------------

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism(const AcceptanceOptions& options) {
  ConstituentCorpusSpec spec;
  spec.heads = 20;
  spec.compression_train = 12;
  spec.compression_test = 6;
  spec.ccg_sentences = 12;
  spec.gaze_readers = 2;
  spec.gaze_sentences = 8;
  const auto corpus = make_constituent_corpus(spec, 5);

  const auto dir = options.work_dir / "determinism";
  std::filesystem::create_directories(dir);
  write_labeled_file(dir / "train.conll", corpus.compression_train, kCompressionTask);
  write_labeled_file(dir / "dev.conll", corpus.compression_test, kCompressionTask);
  write_labeled_file(dir / "ccg.conll", corpus.ccg_train, kCcgTask);
  std::vector<LabeledSentence> reader_a(corpus.gaze_train.begin(), corpus.gaze_train.begin() + 8);
  std::vector<LabeledSentence> reader_b(corpus.gaze_train.begin() + 8, corpus.gaze_train.end());
  write_labeled_file(dir / "ra.first_pass.conll", reader_a, kGazeTask);
  write_labeled_file(dir / "rb.first_pass.conll", reader_b, kGazeTask);

  std::string models[2];
  std::string logs[2];
  for (int run = 0; run < 2; ++run) {
    ExperimentConfig config;
    config.model.architecture = Architecture::cascaded;
    config.model.layers = 3;
    config.model.hidden_size = 8;
    config.model.embedding_dim = 8;
    config.model.iterations = 3;
    config.model.seed = 42;
    config.compression_train = dir / "train.conll";
    config.compression_dev = dir / "dev.conll";
    config.ccg_train = dir / "ccg.conll";
    config.gaze_train = {(dir / "ra.{measure}.conll").string(), (dir / "rb.{measure}.conll").string()};
    config.model_out = dir / ("model" + std::to_string(run) + ".bin");
    config.log_path = dir / ("train" + std::to_string(run) + ".log");
    const auto data = load_experiment_data(config);
    run_experiment(config, data);
    models[run] = slurp(config.model_out);
    logs[run] = slurp(config.log_path);
  }
  const bool same_model = !models[0].empty() && models[0] == models[1];
  const bool same_log = !logs[0].empty() && logs[0] == logs[1];
  return {same_model && same_log, std::string("model files ") + (same_model ? "identical" : "DIFFER") + " (" +
                                      std::to_string(models[0].size()) + " bytes), loss traces " +
                                      (same_log ? "identical" : "DIFFER")};
}

// ---- 9. multi-task trend ----------------------------------------------------

Outcome multitask_trend(const AcceptanceOptions&) {
  const auto r = run_multitask_trend(5);
  const double mean_base = std::accumulate(r.baseline_f1.begin(), r.baseline_f1.end(), 0.0) / 5.0;
  const double mean_casc = std::accumulate(r.cascaded_f1.begin(), r.cascaded_f1.end(), 0.0) / 5.0;
  int wins = 0;
  std::ostringstream detail;
  for (std::size_t i = 0; i < 5; ++i) {
    wins += r.cascaded_f1[i] > r.baseline_f1[i];
    detail << "seed" << i + 1 << " " << fixed(r.baseline_f1[i]) << "/" << fixed(r.cascaded_f1[i]) << " ";
  }
  detail << "| mean baseline " << fixed(mean_base) << " cascaded " << fixed(mean_casc) << ", cascaded wins " << wins
         << "/5";
  return {mean_casc >= mean_base - 0.01 && wins >= 3, detail.str()};
}

// ---- 10. reproduction (non-binding) -----------------------------------------

Outcome reproduction(const AcceptanceOptions& options) {
  if (!options.reproduction_data) return {true, "skipped: no reproduction data supplied"};
  const auto& dir = *options.reproduction_data;
  ExperimentConfig config;
  config.model.architecture = Architecture::baseline;
  config.compression_train = dir / "train.conll";
  config.ccg_train = dir / "ccg.conll";
  config.model_out = options.work_dir / "reproduction.bin";
  if (std::filesystem::exists(dir / "embeddings.txt")) config.embeddings = dir / "embeddings.txt";
  std::filesystem::create_directories(options.work_dir);
  const auto data = load_experiment_data(config);
  auto outcome = run_experiment(config, data);
  Model model = load_model(config.model_out);
  const auto test = parse_labeled_file(dir / "test.conll", kCompressionTask);
  LabelSequences gold;
  for (const auto& s : test) gold.push_back(s.labels_for(kCompressionTask));
  const double f1 = token_f1(gold, predict_corpus(model, test)).f1;
  return {f1 >= 0.75 && f1 <= 0.85, "baseline F1 " + fixed(f1) + " (target band 0.75-0.85)"};
}

}  // namespace

TrendResult run_multitask_trend(std::size_t seeds) {
  TrendResult result;
  for (std::size_t s = 1; s <= seeds; ++s) {
    ConstituentCorpusSpec spec;
    spec.heads = 240;
    spec.compression_train = 100;
    spec.compression_test = 300;
    spec.ccg_sentences = 300;
    spec.gaze_readers = 3;
    spec.gaze_sentences = 300;
    spec.gaze_noise = 0.2;
    const auto corpus = make_constituent_corpus(spec, 1000 + s);
    ExperimentData data;
    data.compression_train = corpus.compression_train;
    data.ccg_train = corpus.ccg_train;
    data.gaze_train = corpus.gaze_train;
    LabelSequences gold;
    for (const auto& sentence : corpus.compression_test) gold.push_back(sentence.labels_for(kCompressionTask));

    for (Architecture arch : {Architecture::baseline, Architecture::cascaded}) {
      ArchitectureConfig config;
      config.architecture = arch;
      config.layers = 3;
      config.hidden_size = 16;
      config.embedding_dim = 16;
      config.learning_rate = 0.05;
      config.clip_norm = 5.0;
      // Three-task sampling gives cascaded a third fewer compression updates
      // per epoch than the baseline; 30 epochs leaves it under-trained.
      config.iterations = 60;
      config.seed = s;
      Model model = build_experiment_model(config, data);
      const TaskDatasets sets = encode_experiment_data(model, data);
      train(model, sets);
      const double f1 = token_f1(gold, predict_corpus(model, corpus.compression_test)).f1;
      (arch == Architecture::baseline ? result.baseline_f1 : result.cascaded_f1).push_back(f1);
    }
  }
  return result;
}

std::vector<Criterion> acceptance_criteria() {
  return {
      {1, "gradient correctness (finite differences, rel err < 1e-4)", 60.0, false, true, gradient_correctness},
      {2, "cascaded scope isolation over 100 aux steps", 10.0, false, true, scope_isolation},
      {3, "gaze measures match brute-force oracle", 5.0, false, true, gaze_oracle},
      {4, "six-bin discretization matches threshold oracle", 1.0, false, true, binning},
      {5, "KEEP/DEL derivation matches brute-force LCS", 5.0, false, true, label_derivation},
      {6, "token F1 matches confusion-matrix oracle", 2.0, false, true, f1_oracle},
      {7, "baseline overfits 32 sentences to >= 0.99 accuracy", 120.0, true, true, overfit},
      {8, "identical config and seed give identical model and log", 60.0, false, true, determinism},
      {9, "cascaded >= baseline - 0.01 on average, wins >= 3/5 seeds", 600.0, true, true, multitask_trend},
      {10, "baseline F1 in 0.75-0.85 on user-supplied data (non-binding)", 36000.0, true, false, reproduction},
  };
}

CriterionResult run_criterion(const Criterion& criterion, const AcceptanceOptions& options) {
  CriterionResult result;
  result.id = criterion.id;
  result.name = criterion.name;
  result.budget_seconds = criterion.budget_seconds;
  result.binding = criterion.binding;
  if (criterion.slow && options.skip_slow) {
    result.verdict = Verdict::skip;
    result.detail = "skipped (--skip-slow)";
    return result;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    auto [passed, detail] = criterion.run(options);
    result.verdict = passed ? Verdict::pass : Verdict::fail;
    result.detail = std::move(detail);
  } catch (const std::exception& e) {
    result.verdict = Verdict::fail;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.verdict == Verdict::pass && result.seconds > result.budget_seconds) {
    result.verdict = Verdict::fail;
    result.detail += "; over runtime budget";
  }
  if (criterion.id == 10 && result.detail.rfind("skipped", 0) == 0) result.verdict = Verdict::skip;
  return result;
}

std::string format_result_line(const CriterionResult& r) {
  std::ostringstream os;
  const char* verdict = r.verdict == Verdict::pass ? "PASS" : r.verdict == Verdict::skip ? "SKIP" : "FAIL";
  os << '[' << verdict << "] " << r.id << ". " << r.name << " (" << std::fixed << std::setprecision(2) << r.seconds
     << "s / " << std::setprecision(0) << r.budget_seconds << "s)" << (r.binding ? "" : " [non-binding]") << " - "
     << r.detail;
  return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out) {
  std::vector<CriterionResult> results;
  for (const auto& c : acceptance_criteria()) {
    results.push_back(run_criterion(c, options));
    out << format_result_line(results.back()) << std::endl;
  }
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::none_of(results.begin(), results.end(),
                      [](const CriterionResult& r) { return r.binding && r.verdict == Verdict::fail; });
}

}  // namespace gazecomp::selftest
