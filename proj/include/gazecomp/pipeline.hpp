#ifndef GAZECOMP_PIPELINE_HPP
#define GAZECOMP_PIPELINE_HPP

// File-level workflows shared by the command-line tool and the test suites.

#include <optional>
#include <string>
#include <vector>

#include "gazecomp/compression_data.hpp"
#include "gazecomp/config.hpp"
#include "gazecomp/embeddings.hpp"
#include "gazecomp/model.hpp"

namespace gazecomp {

struct ExperimentData {
  std::vector<LabeledSentence> compression_train;
  std::vector<LabeledSentence> compression_dev;
  std::vector<LabeledSentence> ccg_train;
  std::vector<LabeledSentence> gaze_train;  // one sentence per (reader, sentence)
  std::optional<PretrainedEmbeddings> embeddings;
};

/// Reads every corpus named by the config. Gaze files are only read for
/// architectures with a gaze task.
ExperimentData load_experiment_data(const ExperimentConfig& config);

/// Vocabulary of every training token in first-seen order, UNK first.
Vocabulary build_vocabulary(const ExperimentData& data);

/// Pretrained embeddings fix the vocabulary; otherwise it is built from the
/// training corpora and embeddings are randomly initialized.
Model build_experiment_model(const ArchitectureConfig& config, const ExperimentData& data);

TaskDatasets encode_experiment_data(const Model& model, const ExperimentData& data);

struct ExperimentOutcome {
  TrainResult result;
  std::string log_text;
  bool used_best_snapshot = false;
};

/// Trains, keeps the best-dev snapshot when a dev set is configured, writes
/// the model (and log, if configured). The model is written even when training
/// aborted; it then holds the last good parameters.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const ExperimentData& data);

/// Tab-separated per-epoch log: `epoch task steps mean_loss` rows plus
/// `epoch dev_f1 value` rows.
std::string format_training_log(const TrainResult& result);

/// Gradient check of the summed loss over one instance per task. Uses the
/// first instance of each configured corpus, or a seeded random sentence per
/// task when no compression corpus is configured.
ad::GradCheckReport run_gradcheck(const ExperimentConfig& config, double epsilon);

}  // namespace gazecomp

#endif  // GAZECOMP_PIPELINE_HPP
