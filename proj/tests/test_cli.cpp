#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gazecomp/cli.hpp"
#include "gazecomp/compression_data.hpp"
#include "gazecomp/model.hpp"
#include "gazecomp/selftest/synthetic.hpp"

using namespace gazecomp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gazecomp-test-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Small training setup shared by train / evaluate / predict.
fs::path experiment(const std::string& name) {
  const auto dir = scratch(name);
  selftest::ConstituentCorpusSpec spec;
  spec.heads = 10;
  spec.compression_train = 6;
  spec.compression_test = 3;
  spec.ccg_sentences = 6;
  spec.gaze_readers = 1;
  spec.gaze_sentences = 4;
  const auto c = selftest::make_constituent_corpus(spec, 9);
  write_labeled_file(dir / "train.conll", c.compression_train, kCompressionTask);
  write_labeled_file(dir / "test.conll", c.compression_test, kCompressionTask);
  write_labeled_file(dir / "ccg.conll", c.ccg_train, kCcgTask);
  write_labeled_file(dir / "r1.first_pass.conll", c.gaze_train, kGazeTask);
  write_labeled_file(dir / "r1.regression.conll", c.gaze_train, kGazeTask);
  write(dir / "exp.cfg",
        "architecture = baseline\nlayers = 2\nhidden_size = 4\nembedding_dim = 4\niterations = 2\n"
        "compression_train = train.conll\nccg_train = ccg.conll\ngaze_train = r1.{measure}.conll\n");
  return dir;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"stats"}).code == 1);  // missing --input
    const auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("make-labels") != std::string::npos);
  }

  TEST_CASE("make-labels and stats") {
    const auto dir = scratch("labels");
    write(dir / "pairs.tsv", "a b c\ta c\nd e\tz\nRegulators Friday shut down a bank\tRegulators shut down a bank\n");
    const auto r = cli({"make-labels", "--input", (dir / "pairs.tsv").string(), "--output",
                        (dir / "labeled.conll").string(), "--rejects", (dir / "rejects.tsv").string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("rejected 1") != std::string::npos);
    CHECK(slurp(dir / "rejects.tsv").rfind("2\t", 0) == 0);
    CHECK(slurp(dir / "labeled.conll").rfind("a\tKEEP\nb\tDEL\nc\tKEEP\n\nRegulators\tKEEP\nFriday\tDEL\n", 0) == 0);

    const auto to_stdout = cli({"make-labels", "--input", (dir / "pairs.tsv").string()});
    CHECK(to_stdout.out == slurp(dir / "labeled.conll"));

    const auto st = cli({"stats", "--input", (dir / "labeled.conll").string()});
    CHECK(st.code == 0);
    CHECK(st.out.find("sentences\t2\n") != std::string::npos);
    CHECK(st.out.find("deletion_rate\t0.2222222222222222") != std::string::npos);
  }

  TEST_CASE("data errors carry file and line") {
    const auto dir = scratch("bad");
    write(dir / "pairs.tsv", "a b\ta\nno tab\n");
    const auto r = cli({"make-labels", "--input", (dir / "pairs.tsv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("pairs.tsv:2") != std::string::npos);
    CHECK(cli({"stats", "--input", (dir / "missing.conll").string()}).code == 2);
  }

  TEST_CASE("preprocess-gaze") {
    const auto dir = scratch("gaze");
    write(dir / "fix.tsv", "r1\ts1\t0\t200\nr1\ts1\t1\t150\nr1\ts1\t0\t300\nr2\ts1\t1\t90\n");
    write(dir / "sent.tsv", "s1\tHello world\n");
    const auto r = cli({"preprocess-gaze", "--fixations", (dir / "fix.tsv").string(), "--sentences",
                        (dir / "sent.tsv").string(), "--out-dir", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "out" / "r1.first_pass.conll"));
    CHECK(fs::exists(dir / "out" / "r2.regression.conll"));
    CHECK(slurp(dir / "out" / "r2.first_pass.conll") == "Hello\t0\nworld\t3\n");
  }

  TEST_CASE("train, evaluate, predict") {
    const auto dir = experiment("train");
    const std::vector<std::string> base = {"train",        "--config", (dir / "exp.cfg").string(), "--arch",
                                           "cascaded",     "--gaze-measure", "regression", "--seed", "42"};
    auto run1 = base;
    run1.insert(run1.end(), {"--model", (dir / "a.bin").string(), "--log", (dir / "a.log").string()});
    auto run2 = base;
    run2.insert(run2.end(), {"--model", (dir / "b.bin").string(), "--log", (dir / "b.log").string()});
    const auto t1 = cli(run1);
    const auto t2 = cli(run2);
    REQUIRE(t1.code == 0);
    REQUIRE(t2.code == 0);
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
    CHECK(slurp(dir / "a.log") == slurp(dir / "b.log"));
    CHECK(t1.err.empty());

    const auto stamped = cli({"train", "--config", (dir / "exp.cfg").string(), "--model", (dir / "c.bin").string(),
                              "--timestamps"});
    CHECK(stamped.code == 0);
    CHECK(stamped.err.find("done") != std::string::npos);

    const auto ev = cli({"evaluate", "--model", (dir / "a.bin").string(), "--input", (dir / "test.conll").string()});
    CHECK(ev.code == 0);
    CHECK(ev.out.find("KEEP") != std::string::npos);
    CHECK(ev.out.find("DEL") != std::string::npos);

    write(dir / "raw.txt", "Regulators Friday shut down a small Florida bank\n\nm0 h1 f2\n");
    const auto pr = cli({"predict", "--model", (dir / "a.bin").string(), "--input", (dir / "raw.txt").string(),
                         "--conll", (dir / "pred.conll").string()});
    CHECK(pr.code == 0);
    std::istringstream lines(pr.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
      ++n;
      const auto tab = line.find('\t');
      REQUIRE(tab != std::string::npos);
      const auto labels = split_tokens(line.substr(0, tab));
      for (const auto& l : labels) CHECK((l == "KEEP" || l == "DEL"));
    }
    CHECK(n == 2);
    CHECK(fs::exists(dir / "pred.conll"));

    CHECK(cli({"evaluate", "--model", (dir / "nope.bin").string(), "--input", (dir / "test.conll").string()}).code ==
          2);
    write(dir / "bad.cfg", "layerz = 3\n");
    CHECK(cli({"train", "--config", (dir / "bad.cfg").string()}).code == 1);
  }

  TEST_CASE("gradcheck exit codes") {
    const auto ok = cli({"gradcheck", "--arch", "multitask"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("max_rel_error\t") != std::string::npos);
    // Roundoff swamps a 1e-13 step, so the check must fail.
    const auto noisy = cli({"gradcheck", "--epsilon", "1e-13"});
    CHECK(noisy.code == 3);
    CHECK(noisy.err.find("gradient check failed") != std::string::npos);
    CHECK(cli({"gradcheck", "--epsilon", "0"}).code == 1);
  }

  TEST_CASE("selftest fast subset") {
    const auto r = cli({"selftest", "--skip-slow", "--work-dir", scratch("selftest").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("[PASS] 1.") != std::string::npos);
    CHECK(r.out.find("[SKIP] 7.") != std::string::npos);
  }
}
