#include "gazecomp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gazecomp/compression_data.hpp"
#include "gazecomp/config.hpp"
#include "gazecomp/error.hpp"
#include "gazecomp/evaluation.hpp"
#include "gazecomp/gaze.hpp"
#include "gazecomp/log.hpp"
#include "gazecomp/model.hpp"
#include "gazecomp/model_io.hpp"
#include "gazecomp/pipeline.hpp"
#include "gazecomp/selftest/acceptance.hpp"

namespace gazecomp {

namespace {

constexpr double kGradTolerance = 1e-4;

struct Options {
  std::string fixations, sentences, out_dir;
  std::string input, output, rejects;
  std::string config, model, log;
  std::string arch, gaze_measure;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<int> iterations;
  bool timestamps = false;
  std::string conll_out;
  double epsilon = 1e-5;
  bool skip_slow = false;
  std::string data_dir, work_dir;
};

std::string now_stamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

int preprocess_gaze(const Options& o, std::ostream& out) {
  const auto events = parse_fixation_file(o.fixations);
  const auto sentences = parse_gaze_sentence_file(o.sentences);
  const auto gaze = compute_word_gaze(events, sentences);
  std::filesystem::create_directories(o.out_dir);
  for (const auto& path : export_gaze_corpus(sentences, gaze, o.out_dir)) out << path.string() << '\n';
  return kExitOk;
}

int make_labels(const Options& o, std::ostream& out, std::ostream& err) {
  const auto pairs = parse_parallel_file(o.input);
  const auto result = label_corpus(pairs);
  if (o.output.empty() || o.output == "-") {
    write_labeled(out, result.sentences, kCompressionTask);
  } else {
    auto file = open_output(o.output);
    write_labeled(file, result.sentences, kCompressionTask);
  }
  if (!o.rejects.empty()) {
    auto file = open_output(o.rejects);
    for (const auto& r : result.rejected) file << r.line << '\t' << r.reason << '\n';
  }
  err << "labeled " << result.sentences.size() << " of " << pairs.size() << " pairs, rejected "
      << result.rejected.size() << '\n';
  return kExitOk;
}

int stats(const Options& o, std::ostream& out) {
  const auto corpus = parse_labeled_file(o.input, kCompressionTask);
  const auto s = corpus_stats(corpus);
  out << "sentences\t" << s.sentence_count << '\n'
      << "mean_length\t" << format_double(s.mean_length) << '\n'
      << "type_token_ratio\t" << format_double(s.type_token_ratio) << '\n'
      << "deletion_rate\t" << format_double(s.deletion_rate) << '\n';
  return kExitOk;
}

int train_command(const Options& o, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = load_experiment_config(o.config);
  if (!o.arch.empty()) apply_setting(config, "architecture", o.arch);
  if (!o.gaze_measure.empty()) apply_setting(config, "gaze_measure", o.gaze_measure);
  if (o.seed) config.model.seed = *o.seed;
  if (o.learning_rate) apply_setting(config, "learning_rate", format_double(*o.learning_rate));
  if (o.iterations) apply_setting(config, "iterations", std::to_string(*o.iterations));
  if (!o.model.empty()) config.model_out = o.model;
  if (!o.log.empty()) config.log_path = o.log;
  config.model.validate();

  if (o.timestamps) err << now_stamp() << " loading data\n";
  const auto data = load_experiment_data(config);
  if (o.timestamps) err << now_stamp() << " training " << architecture_name(config.model.architecture) << '\n';
  const auto outcome = run_experiment(config, data);
  if (o.timestamps) err << now_stamp() << " done\n";

  out << outcome.log_text;
  out << "# model " << config.model_out.string() << '\n';
  if (outcome.used_best_snapshot) {
    out << "# best dev F1 " << format_double(outcome.result.best_dev_f1) << " at epoch "
        << outcome.result.best_epoch << '\n';
  }
  if (outcome.result.aborted) {
    err << "error: training aborted: " << outcome.result.abort_reason << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int evaluate_command(const Options& o, std::ostream& out) {
  Model model = load_model(o.model);
  const auto corpus = parse_labeled_file(o.input, kCompressionTask);
  LabelSequences gold;
  for (const auto& s : corpus) gold.push_back(s.labels_for(kCompressionTask));
  const auto pred = predict_corpus(model, corpus);
  const auto keep = token_f1(gold, pred, kKeep);
  const auto del = token_f1(gold, pred, kDel);
  out << format_report(keep) << '\n' << format_report(del) << '\n';
  out << report_record_header() << '\n' << format_report_record(keep) << '\n' << format_report_record(del) << '\n';
  return kExitOk;
}

int predict_command(const Options& o, std::ostream& out) {
  Model model = load_model(o.model);
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!o.input.empty() && o.input != "-") {
    file.open(o.input, std::ios::binary);
    if (!file) throw DataError("cannot open " + o.input);
    in = &file;
  }
  std::vector<LabeledSentence> labeled;
  std::string line;
  while (std::getline(*in, line)) {
    const auto tokens = split_tokens(strip_cr(line));
    if (tokens.empty()) continue;
    const auto labels = predict_compression(model, tokens);
    for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? " " : "") << labels[i];
    out << '\t' << compressed_surface(tokens, labels) << '\n';
    LabeledSentence s;
    s.tokens = tokens;
    s.labels[std::string(kCompressionTask)] = labels;
    labeled.push_back(std::move(s));
  }
  if (!o.conll_out.empty()) write_labeled_file(o.conll_out, labeled, kCompressionTask);
  return kExitOk;
}

int gradcheck_command(const Options& o, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  if (o.config.empty()) {
    // Small enough that checking every coordinate takes seconds.
    config.model.layers = 2;
    config.model.hidden_size = 8;
    config.model.embedding_dim = 8;
  } else {
    config = load_experiment_config(o.config);
  }
  if (!o.arch.empty()) apply_setting(config, "architecture", o.arch);
  const auto report = run_gradcheck(config, o.epsilon);
  for (const auto& w : report.worst) {
    out << w.name << '\t' << w.row << ',' << w.col << '\t' << format_double(w.rel_error) << '\n';
  }
  out << "max_rel_error\t" << format_double(report.max_rel_error) << '\n';
  out << "coordinates\t" << report.coordinates << '\n';
  if (!(report.max_rel_error < kGradTolerance)) {
    err << "error: gradient check failed: max relative error " << format_double(report.max_rel_error)
        << " >= " << format_double(kGradTolerance) << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int selftest_command(const Options& o, std::ostream& out) {
  selftest::AcceptanceOptions options;
  options.skip_slow = o.skip_slow;
  if (!o.data_dir.empty()) options.reproduction_data = o.data_dir;
  if (!o.work_dir.empty()) options.work_dir = o.work_dir;
  const auto results = selftest::run_acceptance(options, out);
  return selftest::all_passed(results) ? kExitOk : kExitNumeric;
}

// Routes library diagnostics to `err` for the duration of one invocation.
class LogRedirect {
 public:
  explicit LogRedirect(std::ostream& err) { set_log_stream(&err); }
  ~LogRedirect() { set_log_stream(&std::cerr); }
  LogRedirect(const LogRedirect&) = delete;
  LogRedirect& operator=(const LogRedirect&) = delete;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentence compression with gaze and CCG auxiliary tasks", "gazecomp"};
  app.require_subcommand(1);
  Options o;

  auto* pre = app.add_subcommand("preprocess-gaze", "fixation log -> per-reader gaze label files");
  pre->add_option("--fixations", o.fixations, "reader<TAB>sentence<TAB>word<TAB>ms lines")->required();
  pre->add_option("--sentences", o.sentences, "sentence_id<TAB>tokens lines")->required();
  pre->add_option("--out-dir", o.out_dir, "output directory")->required();

  auto* labels = app.add_subcommand("make-labels", "parallel source/compression TSV -> KEEP/DEL corpus");
  labels->add_option("--input", o.input, "source<TAB>compression lines")->required();
  labels->add_option("--output", o.output, "labeled corpus (default stdout)");
  labels->add_option("--rejects", o.rejects, "rejection report");

  auto* st = app.add_subcommand("stats", "corpus statistics of a labeled corpus");
  st->add_option("--input", o.input, "labeled corpus")->required();

  auto* tr = app.add_subcommand("train", "train a model from a config file");
  tr->add_option("--config", o.config, "key = value config file")->required();
  tr->add_option("--arch", o.arch, "baseline, multitask or cascaded");
  tr->add_option("--gaze-measure", o.gaze_measure, "first_pass or regression");
  tr->add_option("--seed", o.seed, "random seed");
  tr->add_option("--learning-rate", o.learning_rate, "SGD learning rate");
  tr->add_option("--iterations", o.iterations, "epochs");
  tr->add_option("--model", o.model, "output model path");
  tr->add_option("--log", o.log, "training log path");
  tr->add_flag("--timestamps", o.timestamps, "timestamp progress messages");

  auto* ev = app.add_subcommand("evaluate", "score a model on a labeled corpus");
  ev->add_option("--model", o.model, "model file")->required();
  ev->add_option("--input", o.input, "labeled corpus")->required();

  auto* pr = app.add_subcommand("predict", "compress raw sentences, one per line");
  pr->add_option("--model", o.model, "model file")->required();
  pr->add_option("--input", o.input, "sentences (default stdin)");
  pr->add_option("--conll", o.conll_out, "also write token<TAB>label output here");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gc->add_option("--config", o.config, "config file (synthetic data when absent)");
  gc->add_option("--epsilon", o.epsilon, "finite-difference step")->check(CLI::PositiveNumber);
  gc->add_option("--arch", o.arch, "baseline, multitask or cascaded");

  auto* self = app.add_subcommand("selftest", "run the synthetic acceptance suite");
  self->add_flag("--skip-slow", o.skip_slow, "skip the long training checks");
  self->add_option("--data", o.data_dir, "directory for the reproduction check");
  self->add_option("--work-dir", o.work_dir, "scratch directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (!app.get_subcommands().empty()) {
      err << app.get_subcommands().front()->help();
    } else {
      err << app.help();
    }
    return kExitUsage;
  }

  LogRedirect redirect(err);
  try {
    if (pre->parsed()) return preprocess_gaze(o, out);
    if (labels->parsed()) return make_labels(o, out, err);
    if (st->parsed()) return stats(o, out);
    if (tr->parsed()) return train_command(o, out, err);
    if (ev->parsed()) return evaluate_command(o, out);
    if (pr->parsed()) return predict_command(o, out);
    if (gc->parsed()) return gradcheck_command(o, out, err);
    if (self->parsed()) return selftest_command(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gazecomp
