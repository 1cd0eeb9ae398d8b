#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "gazecomp/error.hpp"
#include "gazecomp/config.hpp"

using namespace gazecomp;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    ArchitectureConfig c;
    CHECK(c.layers == 3);
    CHECK(c.hidden_size == 50);
    CHECK(c.embedding_dim == 50);
    CHECK(c.iterations == 30);
    CHECK_FALSE(c.clip_norm.has_value());
    c.validate();
  }

  TEST_CASE("settings and validation") {
    ArchitectureConfig c;
    apply_setting(c, "architecture", "multitask");
    apply_setting(c, "gaze_measure", "regression");
    apply_setting(c, "clip_norm", "5");
    apply_setting(c, "finetune_embeddings", "true");
    CHECK(c.architecture == Architecture::multitask);
    CHECK(c.gaze_measure == GazeMeasure::regression);
    CHECK(c.clip_norm.value() == 5.0);
    CHECK(c.finetune_embeddings);
    apply_setting(c, "clip_norm", "none");
    CHECK_FALSE(c.clip_norm);
    CHECK_THROWS_AS(apply_setting(c, "layerz", "3"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "layers", "three"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "architecture", "deep"), ConfigError);
    c.learning_rate = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("canonical form round-trips exactly") {
    ArchitectureConfig c;
    c.learning_rate = 0.1 + 0.2;  // not representable in short decimal
    c.seed = 18446744073709551615ull;
    c.clip_norm = 2.5;
    std::istringstream in(to_key_values(c));
    const auto back = architecture_from_key_values(parse_key_values(in));
    CHECK(back.learning_rate == c.learning_rate);
    CHECK(back.seed == c.seed);
    CHECK(back.clip_norm == c.clip_norm);
    CHECK(to_key_values(back) == to_key_values(c));
  }

  TEST_CASE("experiment file resolves paths and the measure placeholder") {
    const auto dir = std::filesystem::temp_directory_path() / "gazecomp-test-config";
    std::filesystem::create_directories(dir);
    {
      std::ofstream f(dir / "exp.cfg");
      f << "# experiment\narchitecture = cascaded\ncompression_train = data/train.conll\n"
           "gaze_train = gaze/r1.{measure}.conll, gaze/r2.{measure}.conll\ngaze_measure = regression\n";
    }
    const auto e = load_experiment_config(dir / "exp.cfg");
    CHECK(e.compression_train == dir / "data/train.conll");
    const auto files = e.gaze_files();
    REQUIRE(files.size() == 2);
    CHECK(files[1] == dir / "gaze/r2.regression.conll");

    std::istringstream bad("layers 3\n");
    CHECK_THROWS_AS(parse_key_values(bad, "x.cfg"), ConfigError);
    CHECK_THROWS_AS(load_experiment_config(dir / "missing.cfg"), ConfigError);
  }
}
