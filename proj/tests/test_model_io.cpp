#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "gazecomp/error.hpp"
#include "gazecomp/model_io.hpp"

using namespace gazecomp;

namespace {

Model make(Architecture arch) {
  ArchitectureConfig c;
  c.architecture = arch;
  c.layers = 2;
  c.hidden_size = 3;
  c.embedding_dim = 4;
  c.seed = 99;
  c.learning_rate = 0.1 + 0.2;
  c.clip_norm = 1.5;
  return build_model(c, Vocabulary({"alpha", "beta", "Gamma"}), {"N", "S", "S\\NP"});
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("round trip is exact") {
    Model m = make(Architecture::cascaded);
    m.parameters().at("head.compression.b").value(1, 0) = 0.1 + 0.2;
    std::stringstream buffer;
    write_model(buffer, m);
    const std::string bytes = buffer.str();
    CHECK(bytes.rfind("GZCMODEL", 0) == 0);

    Model back = read_model(buffer);
    CHECK(back.config().architecture == Architecture::cascaded);
    CHECK(back.config().learning_rate == m.config().learning_rate);
    CHECK(back.config().clip_norm == m.config().clip_norm);
    CHECK(back.vocab().tokens() == m.vocab().tokens());
    CHECK(back.ccg_labels() == m.ccg_labels());
    CHECK(back.snapshot() == m.snapshot());

    std::stringstream again;
    write_model(again, back);
    CHECK(again.str() == bytes);

    const std::vector<std::string> toks = {"alpha", "Gamma", "zzz"};
    CHECK(back.forward_task(toks, "compression") == m.forward_task(toks, "compression"));
  }

  TEST_CASE("corrupt input") {
    std::stringstream bad("NOTAMODEL");
    CHECK_THROWS_AS(read_model(bad), DataError);

    Model m = make(Architecture::baseline);
    std::stringstream buffer;
    write_model(buffer, m);
    const std::string bytes = buffer.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_model(truncated), DataError);
  }

  TEST_CASE("files and manifest") {
    const auto dir = std::filesystem::temp_directory_path() / "gazecomp-test-io";
    std::filesystem::create_directories(dir);
    Model m = make(Architecture::multitask);
    save_model(m, dir / "m.bin");
    CHECK(std::filesystem::exists(dir / "m.bin.manifest"));
    CHECK(model_manifest(m).find("multitask") != std::string::npos);
    Model back = load_model(dir / "m.bin");
    CHECK(back.snapshot() == m.snapshot());
    CHECK_THROWS_AS(load_model(dir / "nope.bin"), DataError);
  }
}
