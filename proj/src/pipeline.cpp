#include "gazecomp/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "gazecomp/error.hpp"
#include "gazecomp/log.hpp"
#include "gazecomp/model_io.hpp"

namespace gazecomp {

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  ExperimentData data;
  if (config.compression_train.empty()) throw ConfigError("compression_train is not set");
  data.compression_train = parse_labeled_file(config.compression_train, kCompressionTask);
  if (!config.compression_dev.empty()) {
    data.compression_dev = parse_labeled_file(config.compression_dev, kCompressionTask);
  }
  if (config.ccg_train.empty()) throw ConfigError("ccg_train is not set");
  data.ccg_train = parse_labeled_file(config.ccg_train, kCcgTask);
  if (config.model.architecture != Architecture::baseline) {
    const auto files = config.gaze_files();
    if (files.empty()) throw ConfigError("gaze_train is not set");
    for (const auto& path : files) {
      auto part = parse_labeled_file(path, kGazeTask);
      data.gaze_train.insert(data.gaze_train.end(), part.begin(), part.end());
    }
  }
  if (!config.embeddings.empty()) {
    data.embeddings = load_embeddings(config.embeddings, static_cast<ad::Index>(config.model.embedding_dim));
  }
  return data;
}

Vocabulary build_vocabulary(const ExperimentData& data) {
  Vocabulary vocab;
  for (const auto* corpus : {&data.compression_train, &data.ccg_train, &data.gaze_train}) {
    for (const auto& s : *corpus) {
      for (const auto& t : s.tokens) vocab.add(t);
    }
  }
  return vocab;
}

Model build_experiment_model(const ArchitectureConfig& config, const ExperimentData& data) {
  auto ccg = collect_labels(data.ccg_train, kCcgTask);
  if (data.embeddings) return build_model(config, data.embeddings->vocab, std::move(ccg), data.embeddings->matrix);
  return build_model(config, build_vocabulary(data), std::move(ccg));
}

TaskDatasets encode_experiment_data(const Model& model, const ExperimentData& data) {
  TaskDatasets sets;
  sets[std::string(kCompressionTask)] = encode_task_data(model, kCompressionTask, data.compression_train);
  if (model.has_task(kCcgTask)) sets[std::string(kCcgTask)] = encode_task_data(model, kCcgTask, data.ccg_train);
  if (model.has_task(kGazeTask)) sets[std::string(kGazeTask)] = encode_task_data(model, kGazeTask, data.gaze_train);
  return sets;
}

std::string format_training_log(const TrainResult& result) {
  std::ostringstream os;
  os << "epoch\ttask\tsteps\tmean_loss\n";
  for (const auto& e : result.epochs) {
    for (const auto& [task, loss] : e.mean_loss) {
      os << e.epoch << '\t' << task << '\t' << e.steps.at(task) << '\t' << format_double(loss) << '\n';
    }
    if (e.dev_f1) os << e.epoch << "\tdev_f1\t-\t" << format_double(*e.dev_f1) << '\n';
  }
  if (result.best) os << "best_epoch\t" << result.best_epoch << "\tdev_f1\t" << format_double(result.best_dev_f1) << '\n';
  if (result.aborted) os << "aborted\t" << result.abort_reason << '\n';
  return os.str();
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const ExperimentData& data) {
  Model model = build_experiment_model(config.model, data);
  const TaskDatasets sets = encode_experiment_data(model, data);
  TrainOptions options;
  options.dev = data.compression_dev;
  ExperimentOutcome outcome;
  outcome.result = train(model, sets, options);
  if (outcome.result.best && !outcome.result.aborted) {
    model.restore(*outcome.result.best);
    outcome.used_best_snapshot = true;
  }
  outcome.log_text = format_training_log(outcome.result);
  save_model(model, config.model_out);
  if (!config.log_path.empty()) {
    std::ofstream log(config.log_path, std::ios::binary);
    if (!log) throw DataError("cannot write " + config.log_path.string());
    log << outcome.log_text;
  }
  return outcome;
}

namespace {

Instance random_instance(std::mt19937_64& rng, ad::Index vocab_size, std::size_t labels, std::size_t length) {
  std::uniform_int_distribution<ad::Index> token(0, vocab_size - 1);
  std::uniform_int_distribution<ad::Index> label(0, static_cast<ad::Index>(labels) - 1);
  Instance inst;
  for (std::size_t i = 0; i < length; ++i) {
    inst.tokens.push_back(token(rng));
    inst.labels.push_back(label(rng));
  }
  return inst;
}

}  // namespace

ad::GradCheckReport run_gradcheck(const ExperimentConfig& config, double epsilon) {
  std::vector<std::pair<std::string, Instance>> instances;
  if (!config.compression_train.empty()) {
    const ExperimentData data = load_experiment_data(config);
    Model model = build_experiment_model(config.model, data);
    const TaskDatasets sets = encode_experiment_data(model, data);
    for (const auto& t : model.tasks()) {
      const auto& list = sets.at(t.name);
      if (list.empty()) throw DataError("no usable instance for task " + t.name);
      instances.emplace_back(t.name, list.front());
    }
    return check_gradients(model, instances, epsilon);
  }
  std::vector<std::string> words;
  for (int i = 0; i < 19; ++i) words.push_back("w" + std::to_string(i));
  Model model = build_model(config.model, Vocabulary(words), {"A", "B", "C", "D"});
  std::mt19937_64 rng(training_seed(config.model.seed));
  for (const auto& t : model.tasks()) {
    instances.emplace_back(t.name, random_instance(rng, model.vocab().size(), t.labels.size(), 5));
  }
  return check_gradients(model, instances, epsilon);
}

}  // namespace gazecomp
