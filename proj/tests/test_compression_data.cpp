#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gazecomp/error.hpp"
#include "gazecomp/compression_data.hpp"
#include "gazecomp/log.hpp"
#include "gazecomp/selftest/oracles.hpp"
#include "gazecomp/selftest/synthetic.hpp"

using namespace gazecomp;

namespace {

std::vector<std::string> labels_of(const std::string& source, const std::string& target) {
  SentencePair p{split_tokens(source), split_tokens(target), 0};
  return align_and_label(p).labels_for(kCompressionTask);
}

using V = std::vector<std::string>;

}  // namespace

TEST_SUITE("compression_data") {
  TEST_CASE("worked alignments") {
    const auto intel = labels_of(
        "Intel would be building car batteries , expanding its business beyond its core strength , the company said "
        "in a statement .",
        "Intel would be building car batteries");
    for (std::size_t i = 0; i < intel.size(); ++i) CHECK(intel[i] == (i < 6 ? "KEEP" : "DEL"));

    CHECK(labels_of("x y z", "x y z") == V{"KEEP", "KEEP", "KEEP"});
    CHECK(labels_of("a b a b", "a b") == V{"KEEP", "KEEP", "DEL", "DEL"});
    CHECK(labels_of("a b c", "a c") == V{"KEEP", "DEL", "KEEP"});
    // Leftmost: "b a" kept over "a" first.
    CHECK(labels_of("b a b", "b") == V{"KEEP", "DEL", "DEL"});
  }

  TEST_CASE("case-insensitive fallback and rejection") {
    CHECK(labels_of("The cat sat", "the cat") == V{"KEEP", "KEEP", "DEL"});
    CHECK_THROWS_AS(labels_of("a b c", "a d"), DataError);
    CHECK_THROWS_AS(labels_of("a b c", "c a"), DataError);
  }

  TEST_CASE("alignment matches brute force") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 200; ++i) {
      const auto pair = selftest::random_sentence_pair(rng);
      const auto kept = lcs_alignment(pair.source, pair.compression, false);
      CHECK(kept == selftest::brute_force_leftmost_embedding(pair.source, pair.compression));
      CHECK(kept.size() == selftest::brute_force_lcs_length(pair.source, pair.compression));
    }
    // Partial overlap: LCS length, not a full cover.
    const V s = {"a", "x", "b", "c"};
    const V t = {"a", "b", "y"};
    CHECK(lcs_alignment(s, t, false) == std::vector<std::size_t>{0, 2});
  }

  TEST_CASE("labeling a corpus counts rejections") {
    std::istringstream in("a b c\ta c\n\nd e\tz\nf g\tg\n");
    set_log_stream(nullptr);
    const auto pairs = parse_parallel(in);
    set_log_stream(&std::cerr);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[1].line == 3);
    const auto result = label_corpus(pairs);
    CHECK(result.sentences.size() == 2);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].line == 3);
    CHECK(result.sentences[0].labels_for(kCompressionTask) == V{"KEEP", "DEL", "KEEP"});
  }

  TEST_CASE("parallel parsing errors carry the line number") {
    std::istringstream in("a b\ta\nno tab here\n");
    try {
      parse_parallel(in, "pairs.tsv");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("pairs.tsv:2") != std::string::npos);
    }
  }

  TEST_CASE("empty parallel file warns") {
    const auto path = std::filesystem::temp_directory_path() / "gazecomp-empty-pairs.tsv";
    { std::ofstream(path).flush(); }
    std::ostringstream log;
    set_log_stream(&log);
    CHECK(parse_parallel_file(path).empty());
    set_log_stream(&std::cerr);
    CHECK(log.str().find("warning") != std::string::npos);
  }

  TEST_CASE("corpus statistics") {
    LabeledSentence s;
    s.tokens = {"a", "b", "c", "d"};
    s.labels["compression"] = {"KEEP", "DEL", "KEEP", "KEEP"};
    std::vector<LabeledSentence> one = {s};
    const auto st = corpus_stats(one);
    CHECK(st.sentence_count == 1);
    CHECK(st.mean_length == 4.0);
    CHECK(st.deletion_rate == doctest::Approx(0.25));

    LabeledSentence t;
    t.tokens = {"a", "a", "b"};
    t.labels["compression"] = {"KEEP", "KEEP", "KEEP"};
    std::vector<LabeledSentence> two = {t};
    CHECK(corpus_stats(two).type_token_ratio == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("labeled corpus round trip and surface") {
    LabeledSentence s;
    s.tokens = {"Regulators", "Friday", "shut", "down", "a", "bank"};
    s.labels["compression"] = {"KEEP", "DEL", "KEEP", "KEEP", "KEEP", "KEEP"};
    std::vector<LabeledSentence> corpus = {s, s};
    std::ostringstream out;
    write_labeled(out, corpus, kCompressionTask);
    std::istringstream in(out.str());
    const auto back = parse_labeled(in, kCompressionTask);
    REQUIRE(back.size() == 2);
    CHECK(back[1].tokens == s.tokens);
    CHECK(back[1].labels_for(kCompressionTask) == s.labels_for(kCompressionTask));
    CHECK(compressed_surface(s.tokens, s.labels_for(kCompressionTask)) == "Regulators shut down a bank");
    CHECK_THROWS_AS(s.labels_for("ccg"), DataError);
  }

  TEST_CASE("CoNLL reader") {
    std::istringstream crlf("a\tKEEP\r\nb\tDEL\r\n\r\nc\tKEEP\r\n");
    const auto sentences = read_conll(crlf);
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0].labels == V{"KEEP", "DEL"});
    std::istringstream bad("a\tKEEP\nb KEEP\n");
    CHECK_THROWS_AS(read_conll(bad, "x.conll"), DataError);
    std::istringstream two_tabs("a\tb\tc\n");
    CHECK_THROWS_AS(read_conll(two_tabs), DataError);
  }
}
