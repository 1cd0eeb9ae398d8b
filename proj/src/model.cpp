#include "gazecomp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gazecomp/error.hpp"
#include "gazecomp/evaluation.hpp"
#include "gazecomp/log.hpp"

namespace gazecomp {

std::optional<ad::Index> TaskSpec::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<ad::Index>(i);
  }
  return std::nullopt;
}

std::vector<TaskAttachment> task_attachments(Architecture arch, int layers) {
  const int top = layers - 1;
  const std::string compression(kCompressionTask);
  const std::string ccg(kCcgTask);
  const std::string gaze(kGazeTask);
  switch (arch) {
    case Architecture::baseline: return {{compression, top}, {ccg, top}};
    case Architecture::multitask: return {{compression, top}, {ccg, top}, {gaze, top}};
    case Architecture::cascaded: return {{compression, top}, {ccg, 0}, {gaze, 0}};
  }
  throw ConfigError("unknown architecture");
}

std::vector<std::string> compression_labels() { return {std::string(kKeep), std::string(kDel)}; }

std::vector<std::string> gaze_labels() { return {"0", "1", "2", "3", "4", "5"}; }

namespace {

ad::Tensor uniform_matrix(ad::Index rows, ad::Index cols, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  ad::Tensor m(rows, cols);
  for (ad::Index r = 0; r < rows; ++r) {
    for (ad::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace

Model::Model(ArchitectureConfig config, Vocabulary vocab, std::vector<std::string> ccg_labels,
             std::optional<ad::Tensor> pretrained_embeddings)
    : config_(std::move(config)),
      vocab_(std::move(vocab)),
      ccg_labels_(std::move(ccg_labels)),
      params_(std::make_unique<ad::ParameterSet>()) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);

  if (pretrained_embeddings) {
    if (pretrained_embeddings->rows() != vocab_.size()) {
      throw ConfigError("embedding matrix has " + std::to_string(pretrained_embeddings->rows()) +
                        " rows for a vocabulary of " + std::to_string(vocab_.size()));
    }
    if (pretrained_embeddings->cols() != config_.embedding_dim) {
      throw ConfigError("embedding dimension " + std::to_string(pretrained_embeddings->cols()) +
                        " differs from embedding_dim " + std::to_string(config_.embedding_dim));
    }
    embedding_ = &params_->add("embedding", std::move(*pretrained_embeddings));
  } else {
    embedding_ = &params_->add("embedding", uniform_matrix(vocab_.size(), config_.embedding_dim, 1.0, rng));
  }

  ad::Index width = config_.embedding_dim;
  for (int i = 0; i < config_.layers; ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    BiLstmParams layer;
    layer.fwd = LstmParams::create(*params_, prefix + ".fwd", width, config_.hidden_size, rng);
    layer.bwd = LstmParams::create(*params_, prefix + ".bwd", width, config_.hidden_size, rng);
    width = layer.output_size();
    layers_.push_back(layer);
  }
  validate_stack(layers_, config_.embedding_dim);

  for (const auto& [name, layer] : task_attachments(config_.architecture, config_.layers)) {
    TaskSpec spec;
    spec.name = name;
    spec.attach_layer = layer;
    if (name == kCompressionTask) {
      spec.labels = compression_labels();
    } else if (name == kGazeTask) {
      spec.labels = gaze_labels();
    } else {
      spec.labels = ccg_labels_;
    }
    if (spec.labels.size() < 2) {
      throw ConfigError("task " + name + " needs at least two labels, got " + std::to_string(spec.labels.size()));
    }
    const ad::Index in = layers_[static_cast<std::size_t>(layer)].output_size();
    const auto out = static_cast<ad::Index>(spec.labels.size());
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    spec.weight = &params_->add("head." + name + ".W", uniform_matrix(out, in, limit, rng));
    spec.bias = &params_->add("head." + name + ".b", ad::Tensor::Zero(out, 1));
    tasks_.push_back(std::move(spec));
  }
}

Model build_model(const ArchitectureConfig& config, Vocabulary vocab, std::vector<std::string> ccg_labels,
                  std::optional<ad::Tensor> pretrained_embeddings) {
  return Model(config, std::move(vocab), std::move(ccg_labels), std::move(pretrained_embeddings));
}

bool Model::has_task(std::string_view name) const {
  return std::any_of(tasks_.begin(), tasks_.end(), [name](const TaskSpec& t) { return t.name == name; });
}

const TaskSpec& Model::task(std::string_view name) const {
  for (const auto& t : tasks_) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown task `" + std::string(name) + "` for architecture " +
                    std::string(architecture_name(config_.architecture)));
}

std::vector<ad::Index> Model::encode(std::span<const std::string> tokens) const {
  std::vector<ad::Index> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab_.lookup(t, config_.lowercase_fallback));
  return ids;
}

std::vector<ad::Var> Model::logits(ad::Tape& tape, std::span<const ad::Index> tokens, const TaskSpec& task) {
  std::vector<ad::Var> inputs;
  inputs.reserve(tokens.size());
  for (ad::Index id : tokens) inputs.push_back(tape.row(*embedding_, id));
  const auto outputs = stack_forward(tape, inputs, layers_, static_cast<std::size_t>(task.attach_layer) + 1);
  const auto& features = outputs.back();
  ad::Var w = tape.parameter(*task.weight);
  ad::Var b = tape.parameter(*task.bias);
  std::vector<ad::Var> out;
  out.reserve(features.size());
  for (const auto& h : features) out.push_back(ad::affine(w, h, b));
  return out;
}

ad::Var Model::sentence_loss(ad::Tape& tape, const Instance& instance, const TaskSpec& task) {
  if (instance.tokens.size() != instance.labels.size()) {
    throw DataError("instance has " + std::to_string(instance.tokens.size()) + " tokens and " +
                    std::to_string(instance.labels.size()) + " labels");
  }
  const auto scores = logits(tape, instance.tokens, task);
  ad::Var total = ad::softmax_cross_entropy(scores[0], instance.labels[0]);
  for (std::size_t t = 1; t < scores.size(); ++t) {
    total = total + ad::softmax_cross_entropy(scores[t], instance.labels[t]);
  }
  return total;
}

ad::Tensor Model::forward_task(std::span<const ad::Index> tokens, const TaskSpec& task) {
  ad::Tape tape;
  const auto scores = logits(tape, tokens, task);
  ad::Tensor out(static_cast<ad::Index>(scores.size()), static_cast<ad::Index>(task.labels.size()));
  for (std::size_t t = 0; t < scores.size(); ++t) {
    const auto& z = scores[t].value();
    const double m = z.maxCoeff();
    const ad::Tensor e = (z.array() - m).exp().matrix();
    out.row(static_cast<ad::Index>(t)) = (e / e.sum()).transpose();
  }
  return out;
}

ad::Tensor Model::forward_task(std::span<const std::string> tokens, std::string_view task_name) {
  const TaskSpec& spec = task(task_name);
  if (tokens.empty()) return ad::Tensor(0, static_cast<ad::Index>(spec.labels.size()));
  return forward_task(encode(tokens), spec);
}

std::unordered_set<std::string> Model::update_scope(const TaskSpec& task) const {
  std::unordered_set<std::string> names;
  for (auto* p : scope_parameters(task)) names.insert(p->name);
  return names;
}

std::vector<ad::Parameter*> Model::scope_parameters(const TaskSpec& task) const {
  std::vector<ad::Parameter*> out;
  if (config_.finetune_embeddings) out.push_back(embedding_);
  for (int i = 0; i <= task.attach_layer; ++i) {
    auto layer = layers_[static_cast<std::size_t>(i)].parameters();
    out.insert(out.end(), layer.begin(), layer.end());
  }
  out.push_back(task.weight);
  out.push_back(task.bias);
  return out;
}

Snapshot Model::snapshot() const {
  Snapshot s;
  s.reserve(params_->size());
  for (const auto& p : *params_) s.push_back(p.value);
  return s;
}

void Model::restore(const Snapshot& snapshot) {
  if (snapshot.size() != params_->size()) throw ConfigError("snapshot does not match the model");
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    auto& p = (*params_)[i];
    if (snapshot[i].rows() != p.value.rows() || snapshot[i].cols() != p.value.cols()) {
      throw ConfigError("snapshot shape mismatch for " + p.name);
    }
    p.value = snapshot[i];
    p.zero_grad();
  }
}

std::vector<std::string> collect_labels(std::span<const LabeledSentence> corpus, std::string_view task) {
  std::set<std::string> labels;
  for (const auto& s : corpus) {
    auto it = s.labels.find(task);
    if (it == s.labels.end()) continue;
    labels.insert(it->second.begin(), it->second.end());
  }
  return {labels.begin(), labels.end()};
}

std::vector<Instance> encode_task_data(const Model& model, std::string_view task,
                                       std::span<const LabeledSentence> corpus) {
  const TaskSpec& spec = model.task(task);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus[i];
    auto it = s.labels.find(task);
    if (s.tokens.empty() || it == s.labels.end() || it->second.size() != s.tokens.size()) {
      log_warning(std::string(task) + " sentence " + std::to_string(i) + ": label/token length mismatch, skipped");
      continue;
    }
    Instance inst;
    inst.tokens = model.encode(s.tokens);
    bool ok = true;
    for (const auto& label : it->second) {
      auto idx = spec.label_index(label);
      if (!idx) {
        ok = false;
        log_warning(std::string(task) + " sentence " + std::to_string(i) + ": unknown label `" + label + "`, skipped");
        break;
      }
      inst.labels.push_back(*idx);
    }
    if (!ok) continue;
    out.push_back(std::move(inst));
  }
  return out;
}

StepResult train_step(Model& model, const TaskDatasets& data, std::mt19937_64& rng) {
  const auto tasks = model.tasks();
  for (const auto& t : tasks) {
    auto it = data.find(t.name);
    if (it == data.end() || it->second.empty()) throw DataError("no training instances for task " + t.name);
  }
  std::uniform_int_distribution<std::size_t> pick_task(0, tasks.size() - 1);
  const TaskSpec& task = tasks[pick_task(rng)];
  const auto& instances = data.find(task.name)->second;
  std::uniform_int_distribution<std::size_t> pick_instance(0, instances.size() - 1);
  const Instance& instance = instances[pick_instance(rng)];

  return {task.name, update_on(model, task, instance)};
}

double update_on(Model& model, const TaskSpec& task, const Instance& instance) {
  if (instance.tokens.empty() || instance.tokens.size() != instance.labels.size()) {
    log_warning("skipping malformed " + task.name + " instance");
    return 0.0;
  }
  ad::Tape tape;
  ad::Var loss = model.sentence_loss(tape, instance, task);
  const double value = loss.value()(0, 0);
  if (!std::isfinite(value)) throw NumericError("non-finite loss on task " + task.name);

  auto scope = model.scope_parameters(task);
  tape.backward(loss, model.update_scope(task));
  if (model.config().clip_norm) ad::clip_grad_norm<double>(scope, *model.config().clip_norm);
  ad::sgd_step<double>(scope, model.config().learning_rate);
  return value;
}

std::uint64_t training_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

TrainResult train(Model& model, const TaskDatasets& data, const TrainOptions& options) {
  TrainResult result;
  auto comp = data.find(kCompressionTask);
  if (comp == data.end() || comp->second.empty()) throw DataError("compression training set is empty");
  const std::size_t steps_per_epoch = comp->second.size();
  std::mt19937_64 rng(training_seed(model.config().seed));

  for (int epoch = 1; epoch <= model.config().iterations; ++epoch) {
    const Snapshot last_good = model.snapshot();
    EpochLog log;
    log.epoch = epoch;
    try {
      for (std::size_t s = 0; s < steps_per_epoch; ++s) {
        auto step = train_step(model, data, rng);
        log.mean_loss[step.task] += step.loss;
        ++log.steps[step.task];
      }
    } catch (const NumericError& e) {
      model.restore(last_good);
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
      return result;
    }
    for (auto& [task, total] : log.mean_loss) total /= static_cast<double>(log.steps[task]);

    if (!options.dev.empty()) {
      const auto pred = predict_corpus(model, options.dev);
      LabelSequences gold;
      for (const auto& s : options.dev) gold.push_back(s.labels_for(kCompressionTask));
      log.dev_f1 = token_f1(gold, pred).f1;
      if (!result.best || *log.dev_f1 > result.best_dev_f1) {
        result.best = model.snapshot();
        result.best_dev_f1 = *log.dev_f1;
        result.best_epoch = epoch;
      }
    }
    result.epochs.push_back(log);
    if (options.on_epoch && !options.on_epoch(result.epochs.back())) break;
  }
  return result;
}

std::vector<std::string> predict_compression(Model& model, std::span<const std::string> tokens) {
  const auto& task = model.task(kCompressionTask);
  const ad::Tensor probs = model.forward_task(tokens, kCompressionTask);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (ad::Index t = 0; t < probs.rows(); ++t) {
    ad::Index best = 0;
    for (ad::Index k = 1; k < probs.cols(); ++k) {
      if (probs(t, k) > probs(t, best)) best = k;
    }
    out.push_back(task.labels[static_cast<std::size_t>(best)]);
  }
  return out;
}

std::vector<std::vector<std::string>> predict_corpus(Model& model, std::span<const LabeledSentence> corpus) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(predict_compression(model, s.tokens));
  return out;
}

ad::GradCheckReport check_gradients(Model& model, std::span<const std::pair<std::string, Instance>> instances,
                                    double epsilon) {
  if (instances.empty()) throw ConfigError("check_gradients: no instances");
  std::vector<const TaskSpec*> specs;
  for (const auto& [name, inst] : instances) specs.push_back(&model.task(name));
  ad::LossFunction<double> loss_fn = [&](ad::Tape& tape) {
    ad::Var total = model.sentence_loss(tape, instances[0].second, *specs[0]);
    for (std::size_t i = 1; i < instances.size(); ++i) {
      total = total + model.sentence_loss(tape, instances[i].second, *specs[i]);
    }
    return total;
  };
  auto params = model.parameters().pointers();
  return ad::finite_difference_check<double>(loss_fn, params, epsilon);
}

}  // namespace gazecomp
