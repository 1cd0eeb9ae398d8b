#ifndef GAZECOMP_MODEL_HPP
#define GAZECOMP_MODEL_HPP

// Stacked bi-LSTM with per-task softmax heads. The architecture decides at
// which layer each task's head reads; a training step for a task only
// updates its head, the layers at or below its attachment point and (when
// fine-tuning) the embeddings.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gazecomp/autodiff.hpp"
#include "gazecomp/compression_data.hpp"
#include "gazecomp/config.hpp"
#include "gazecomp/embeddings.hpp"
#include "gazecomp/recurrent.hpp"

namespace gazecomp {

inline constexpr std::string_view kCcgTask = "ccg";
inline constexpr std::string_view kGazeTask = "gaze";

struct TaskSpec {
  std::string name;
  std::vector<std::string> labels;
  int attach_layer = 0;
  ad::Parameter* weight = nullptr;  // labels x (2 * hidden)
  ad::Parameter* bias = nullptr;    // labels x 1

  std::optional<ad::Index> label_index(std::string_view label) const;
};

struct TaskAttachment {
  std::string task;
  int layer = 0;
};

/// baseline: compression and ccg on the top layer; multitask adds gaze on the
/// top layer; cascaded moves ccg and gaze to layer 0.
std::vector<TaskAttachment> task_attachments(Architecture arch, int layers);

/// Labels of a task in head order. CCG labels come from training data.
std::vector<std::string> compression_labels();
std::vector<std::string> gaze_labels();

/// One training sentence for one task, already mapped to indices.
struct Instance {
  std::vector<ad::Index> tokens;
  std::vector<ad::Index> labels;
};

using TaskDatasets = std::map<std::string, std::vector<Instance>, std::less<>>;

/// Parameter values in registration order.
using Snapshot = std::vector<ad::Tensor>;

class Model {
 public:
  Model(ArchitectureConfig config, Vocabulary vocab, std::vector<std::string> ccg_labels,
        std::optional<ad::Tensor> pretrained_embeddings = std::nullopt);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ArchitectureConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  ad::ParameterSet& parameters() { return *params_; }
  const ad::ParameterSet& parameters() const { return *params_; }
  ad::Parameter& embedding() const { return *embedding_; }
  std::span<const BiLstmParams> layers() const { return layers_; }
  std::span<const TaskSpec> tasks() const { return tasks_; }
  const std::vector<std::string>& ccg_labels() const { return ccg_labels_; }

  bool has_task(std::string_view name) const;
  /// Throws ConfigError for unknown tasks.
  const TaskSpec& task(std::string_view name) const;

  std::vector<ad::Index> encode(std::span<const std::string> tokens) const;

  /// Per-token logits of `task` recorded on `tape`.
  std::vector<ad::Var> logits(ad::Tape& tape, std::span<const ad::Index> tokens, const TaskSpec& task);

  /// Summed per-token cross-entropy of one instance.
  ad::Var sentence_loss(ad::Tape& tape, const Instance& instance, const TaskSpec& task);

  /// Per-token label distributions (rows sum to 1).
  ad::Tensor forward_task(std::span<const std::string> tokens, std::string_view task);
  ad::Tensor forward_task(std::span<const ad::Index> tokens, const TaskSpec& task);

  /// Names updated by a step on `task`.
  std::unordered_set<std::string> update_scope(const TaskSpec& task) const;
  std::vector<ad::Parameter*> scope_parameters(const TaskSpec& task) const;

  Snapshot snapshot() const;
  void restore(const Snapshot& snapshot);

 private:
  ArchitectureConfig config_;
  Vocabulary vocab_;
  std::vector<std::string> ccg_labels_;
  std::unique_ptr<ad::ParameterSet> params_;
  ad::Parameter* embedding_ = nullptr;
  std::vector<BiLstmParams> layers_;
  std::vector<TaskSpec> tasks_;
};

/// Deterministic in config.seed. Embedding and bi-LSTM weights do not depend
/// on the architecture, so models differing only in architecture start from
/// the same shared weights.
Model build_model(const ArchitectureConfig& config, Vocabulary vocab, std::vector<std::string> ccg_labels,
                  std::optional<ad::Tensor> pretrained_embeddings = std::nullopt);

/// Sorted distinct labels of `task` across a corpus.
std::vector<std::string> collect_labels(std::span<const LabeledSentence> corpus, std::string_view task);

/// Maps a labeled corpus onto `task`'s indices. Sentences whose label count
/// differs from the token count, or that carry unknown labels, are skipped
/// with a warning.
std::vector<Instance> encode_task_data(const Model& model, std::string_view task,
                                       std::span<const LabeledSentence> corpus);

struct StepResult {
  std::string task;
  double loss = 0.0;
};

/// One SGD update on `task`'s scope from a single instance. Returns the loss
/// before the update. Throws NumericError on a non-finite loss, leaving the
/// parameters untouched.
double update_on(Model& model, const TaskSpec& task, const Instance& instance);

/// Uniform task, then uniform instance of that task; one SGD update on the
/// task's scope. Throws DataError if a model task has no instances and
/// NumericError on a non-finite loss (parameters untouched in that case).
StepResult train_step(Model& model, const TaskDatasets& data, std::mt19937_64& rng);

struct EpochLog {
  int epoch = 0;
  std::map<std::string, double> mean_loss;
  std::map<std::string, std::size_t> steps;
  std::optional<double> dev_f1;
};

struct TrainOptions {
  /// Compression dev set; enables per-epoch F1 and best-epoch snapshots.
  std::span<const LabeledSentence> dev;
  /// Called after each epoch; returning false stops training early.
  std::function<bool(const EpochLog&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::optional<Snapshot> best;
  double best_dev_f1 = 0.0;
  int best_epoch = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// config.iterations epochs of N steps, N = number of compression instances.
/// On a non-finite loss the model is rolled back to the start of the failing
/// epoch and the result is marked aborted.
TrainResult train(Model& model, const TaskDatasets& data, const TrainOptions& options = {});

/// Argmax per token; ties go to the lowest label index.
std::vector<std::string> predict_compression(Model& model, std::span<const std::string> tokens);

std::vector<std::vector<std::string>> predict_corpus(Model& model, std::span<const LabeledSentence> corpus);

/// Finite-difference check of the summed loss over (task, instance) pairs
/// against backprop, across every parameter including the embeddings.
ad::GradCheckReport check_gradients(Model& model, std::span<const std::pair<std::string, Instance>> instances,
                                    double epsilon);

/// Seed for the training-time sampler, decoupled from initialization.
std::uint64_t training_seed(std::uint64_t seed);

}  // namespace gazecomp

#endif  // GAZECOMP_MODEL_HPP
