#include <cmath>
#include <cstring>
#include <iostream>
#include <random>

#include "doctest.h"
#include "gazecomp/error.hpp"
#include "gazecomp/log.hpp"
#include "gazecomp/model.hpp"
#include "gazecomp/selftest/acceptance.hpp"

using namespace gazecomp;

namespace {

Vocabulary small_vocab() {
  std::vector<std::string> words;
  for (int i = 0; i < 9; ++i) words.push_back("w" + std::to_string(i));
  return Vocabulary(words);
}

ArchitectureConfig tiny(Architecture arch) {
  ArchitectureConfig c;
  c.architecture = arch;
  c.layers = 3;
  c.hidden_size = 4;
  c.embedding_dim = 5;
  c.seed = 7;
  return c;
}

const std::vector<std::string> kCcg = {"N", "NP", "S"};

Instance instance(std::vector<ad::Index> tokens, std::vector<ad::Index> labels) {
  return Instance{std::move(tokens), std::move(labels)};
}

int attach_of(const Model& m, std::string_view task) { return m.task(task).attach_layer; }

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("task attachment per architecture") {
    Model base = build_model(tiny(Architecture::baseline), small_vocab(), kCcg);
    CHECK(base.tasks().size() == 2);
    CHECK(attach_of(base, "compression") == 2);
    CHECK(attach_of(base, "ccg") == 2);
    CHECK_FALSE(base.has_task("gaze"));
    CHECK_THROWS_AS(base.task("gaze"), ConfigError);

    Model multi = build_model(tiny(Architecture::multitask), small_vocab(), kCcg);
    CHECK(multi.tasks().size() == 3);
    CHECK(attach_of(multi, "gaze") == 2);

    Model casc = build_model(tiny(Architecture::cascaded), small_vocab(), kCcg);
    CHECK(attach_of(casc, "compression") == 2);
    CHECK(attach_of(casc, "ccg") == 0);
    CHECK(attach_of(casc, "gaze") == 0);

    CHECK(casc.task("compression").labels == std::vector<std::string>{"KEEP", "DEL"});
    CHECK(casc.task("gaze").labels.size() == 6);
  }

  TEST_CASE("initialization is deterministic and shared across architectures") {
    Model a = build_model(tiny(Architecture::cascaded), small_vocab(), kCcg);
    Model b = build_model(tiny(Architecture::cascaded), small_vocab(), kCcg);
    Model c = build_model(tiny(Architecture::baseline), small_vocab(), kCcg);
    for (const auto& p : a.parameters()) {
      CHECK(p.value == b.parameters().at(p.name).value);
      if (p.name.rfind("head.", 0) != 0) CHECK(p.value == c.parameters().at(p.name).value);
    }
    auto other = tiny(Architecture::cascaded);
    other.seed = 8;
    Model d = build_model(other, small_vocab(), kCcg);
    CHECK(d.embedding().value != a.embedding().value);
  }

  TEST_CASE("pretrained embeddings and shape checks") {
    auto c = tiny(Architecture::baseline);
    ad::Tensor pre = ad::Tensor::Constant(10, 5, 0.25);
    Model m = build_model(c, small_vocab(), kCcg, pre);
    CHECK(m.embedding().value == pre);
    CHECK_THROWS_AS(build_model(c, small_vocab(), kCcg, ad::Tensor::Zero(10, 4)), ConfigError);
    CHECK_THROWS_AS(build_model(c, small_vocab(), {"only"}), ConfigError);
  }

  TEST_CASE("forward distributions") {
    Model m = build_model(tiny(Architecture::multitask), small_vocab(), kCcg);
    const std::vector<std::string> toks = {"w1", "w2", "unseen", "w3"};
    const auto probs = m.forward_task(toks, "compression");
    CHECK(probs.rows() == 4);
    CHECK(probs.cols() == 2);
    for (ad::Index r = 0; r < probs.rows(); ++r) CHECK(std::abs(probs.row(r).sum() - 1.0) < 1e-9);

    for (auto& p : m.parameters()) {
      if (p.name.rfind("head.", 0) == 0) p.value.setZero();
    }
    const auto gaze = m.forward_task(toks, "gaze");
    CHECK((gaze.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-15);
    CHECK(predict_compression(m, toks) == std::vector<std::string>(4, "KEEP"));

    ad::Tape tape;
    const auto loss = m.sentence_loss(tape, instance({1}, {1}), m.task("compression"));
    CHECK(loss.value()(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("update scope") {
    Model casc = build_model(tiny(Architecture::cascaded), small_vocab(), kCcg);
    const auto gaze_scope = casc.update_scope(casc.task("gaze"));
    CHECK(gaze_scope.contains("head.gaze.W"));
    CHECK(gaze_scope.contains("layer0.fwd.W_input"));
    CHECK_FALSE(gaze_scope.contains("layer1.fwd.W_input"));
    CHECK_FALSE(gaze_scope.contains("head.compression.W"));
    CHECK_FALSE(gaze_scope.contains("embedding"));

    auto ft = tiny(Architecture::cascaded);
    ft.finetune_embeddings = true;
    Model tuned = build_model(ft, small_vocab(), kCcg);
    CHECK(tuned.update_scope(tuned.task("ccg")).contains("embedding"));
    CHECK(tuned.update_scope(tuned.task("compression")).contains("layer2.bwd.b_output"));
  }

  TEST_CASE("cascaded gaze step leaves upper layers and the compression head untouched") {
    Model m = build_model(tiny(Architecture::cascaded), small_vocab(), kCcg);
    const auto before = m.snapshot();
    update_on(m, m.task("gaze"), instance({1, 2, 3}, {0, 4, 5}));
    std::size_t k = 0;
    bool layer0_changed = false;
    for (const auto& p : m.parameters()) {
      const bool upper = p.name.rfind("layer1.", 0) == 0 || p.name.rfind("layer2.", 0) == 0 ||
                         p.name.rfind("head.compression.", 0) == 0 || p.name.rfind("head.ccg.", 0) == 0 ||
                         p.name == "embedding";
      if (upper) CHECK_MESSAGE(p.value == before[k], p.name);
      if (p.name.rfind("layer0.", 0) == 0 && p.value != before[k]) layer0_changed = true;
      ++k;
    }
    CHECK(layer0_changed);
  }

  TEST_CASE("multitask gaze step reaches every layer") {
    Model m = build_model(tiny(Architecture::multitask), small_vocab(), kCcg);
    const auto before = m.snapshot();
    update_on(m, m.task("gaze"), instance({1, 2, 3}, {0, 4, 5}));
    for (int layer = 0; layer < 3; ++layer) {
      const std::string name = "layer" + std::to_string(layer) + ".fwd.W_input";
      std::size_t k = 0;
      for (const auto& p : m.parameters()) {
        if (p.name == name) CHECK(p.value != before[k]);
        ++k;
      }
    }
  }

  TEST_CASE("scope isolation helper") {
    const auto r = selftest::check_scope_isolation(20, 2);
    CHECK(r.cascaded_upper_unchanged);
    CHECK(r.multitask_upper_changed);
  }

  TEST_CASE("training") {
    set_log_stream(nullptr);
    auto c = tiny(Architecture::multitask);
    TaskDatasets data;
    data["compression"] = {instance({1, 2, 3}, {0, 1, 0}), instance({4, 5}, {1, 0})};
    data["ccg"] = {instance({1, 2}, {0, 2})};
    data["gaze"] = {instance({3, 4, 5}, {1, 5, 0})};

    SUBCASE("zero iterations leave the model at initialization") {
      c.iterations = 0;
      Model m = build_model(c, small_vocab(), kCcg);
      const auto init = m.snapshot();
      const auto result = train(m, data);
      CHECK(result.epochs.empty());
      CHECK(m.snapshot() == init);
    }

    SUBCASE("identical seeds give identical traces") {
      c.iterations = 3;
      Model a = build_model(c, small_vocab(), kCcg);
      Model b = build_model(c, small_vocab(), kCcg);
      const auto ra = train(a, data);
      const auto rb = train(b, data);
      REQUIRE(ra.epochs.size() == 3);
      for (std::size_t e = 0; e < 3; ++e) {
        CHECK(ra.epochs[e].mean_loss == rb.epochs[e].mean_loss);
        CHECK(ra.epochs[e].steps == rb.epochs[e].steps);
      }
      CHECK(a.snapshot() == b.snapshot());
    }

    SUBCASE("an epoch has one step per compression instance") {
      c.iterations = 1;
      Model m = build_model(c, small_vocab(), kCcg);
      const auto r = train(m, data);
      std::size_t steps = 0;
      for (const auto& [task, n] : r.epochs[0].steps) steps += n;
      CHECK(steps == 2);
    }

    SUBCASE("missing task data is an error") {
      Model m = build_model(c, small_vocab(), kCcg);
      data.erase("gaze");
      CHECK_THROWS_AS(train(m, data), DataError);
    }

    SUBCASE("a non-finite loss aborts and rolls back to the start of the epoch") {
      c.iterations = 3;
      Model m = build_model(c, small_vocab(), kCcg);
      Snapshot epoch2_start;
      TrainOptions opts;
      opts.on_epoch = [&](const EpochLog& log) {
        if (log.epoch == 1) {
          // Every task reads layer 0, so the next step sees a NaN loss.
          m.parameters().at("layer0.fwd.b_input").value(0, 0) = std::numeric_limits<double>::quiet_NaN();
          epoch2_start = m.snapshot();
        }
        return true;
      };
      const auto r = train(m, data, opts);
      CHECK(r.aborted);
      CHECK(r.abort_reason.find("epoch 2") != std::string::npos);
      CHECK(r.epochs.size() == 1);
      const auto now = m.snapshot();
      REQUIRE(now.size() == epoch2_start.size());
      for (std::size_t k = 0; k < now.size(); ++k) {
        CHECK(std::memcmp(now[k].data(), epoch2_start[k].data(), sizeof(double) * now[k].size()) == 0);
      }
    }

    SUBCASE("early stop via callback") {
      c.iterations = 10;
      Model m = build_model(c, small_vocab(), kCcg);
      TrainOptions opts;
      opts.on_epoch = [](const EpochLog& log) { return log.epoch < 2; };
      CHECK(train(m, data, opts).epochs.size() == 2);
    }
    set_log_stream(&std::cerr);
  }

  TEST_CASE("encoding task data skips bad sentences") {
    Model m = build_model(tiny(Architecture::baseline), small_vocab(), kCcg);
    LabeledSentence good;
    good.tokens = {"w1", "w2"};
    good.labels["ccg"] = {"N", "S"};
    LabeledSentence unknown_label = good;
    unknown_label.labels["ccg"] = {"N", "PP"};
    LabeledSentence mismatch = good;
    mismatch.labels["ccg"] = {"N"};
    std::vector<LabeledSentence> corpus = {good, unknown_label, mismatch};
    set_log_stream(nullptr);
    reset_warning_count();
    const auto encoded = encode_task_data(m, "ccg", corpus);
    set_log_stream(&std::cerr);
    CHECK(encoded.size() == 1);
    CHECK(warning_count() == 2);
    CHECK(encoded[0].labels == std::vector<ad::Index>{0, 2});
    CHECK(collect_labels(corpus, "ccg") == std::vector<std::string>{"N", "PP", "S"});
  }

  TEST_CASE("model gradients pass the finite-difference check") {
    for (Architecture arch : {Architecture::multitask, Architecture::cascaded}) {
      auto c = tiny(arch);
      c.layers = 2;
      c.finetune_embeddings = true;
      Model m = build_model(c, small_vocab(), kCcg);
      std::vector<std::pair<std::string, Instance>> items = {
          {"compression", instance({1, 2, 3}, {0, 1, 1})},
          {"ccg", instance({4, 0}, {2, 1})},
          {"gaze", instance({5, 6, 7}, {0, 3, 5})}};
      CHECK(check_gradients(m, items, 1e-5).max_rel_error < 1e-4);
    }
  }

  TEST_CASE("prediction is independent of other sentences") {
    Model m = build_model(tiny(Architecture::baseline), small_vocab(), kCcg);
    const std::vector<std::string> s1 = {"w1", "w2", "w3"};
    const std::vector<std::string> s2 = {"w4", "w5"};
    const auto alone = predict_compression(m, s1);
    predict_compression(m, s2);
    CHECK(predict_compression(m, s1) == alone);
  }
}
