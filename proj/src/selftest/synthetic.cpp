#include "gazecomp/selftest/synthetic.hpp"

#include <algorithm>
#include <string>

#include "gazecomp/model.hpp"

namespace gazecomp::selftest {

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

std::vector<FixationEvent> random_fixation_stream(std::mt19937_64& rng, std::size_t max_fixations,
                                                  std::size_t max_words) {
  const std::size_t words = uniform(rng, 1, max_words);
  const std::size_t count = uniform(rng, 0, max_fixations);
  std::vector<FixationEvent> events;
  std::size_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (i > 0) {
      if (r < 0.3) {
        // refixation
      } else if (r < 0.75) {
        word = std::min(words - 1, word + uniform(rng, 1, 2));
      } else {
        word = uniform(rng, 0, words - 1);
      }
    }
    FixationEvent e;
    e.reader_id = "r";
    e.sentence_id = "s";
    e.word_index = word;
    e.duration_ms = static_cast<std::uint32_t>(uniform(rng, 50, 600));
    e.order = i + 1;
    events.push_back(e);
  }
  return events;
}

SentencePair random_sentence_pair(std::mt19937_64& rng, std::size_t max_source) {
  static const char* kAlphabet[] = {"a", "b", "c", "d", "the", "of"};
  SentencePair pair;
  const std::size_t n = uniform(rng, 1, max_source);
  for (std::size_t i = 0; i < n; ++i) pair.source.emplace_back(kAlphabet[uniform(rng, 0, 5)]);
  while (pair.compression.empty()) {
    for (const auto& t : pair.source) {
      if (coin(rng, 0.5)) pair.compression.push_back(t);
    }
  }
  return pair;
}

LabelCorpusPair random_label_corpora(std::mt19937_64& rng, std::size_t max_sentences, std::size_t max_length) {
  LabelCorpusPair out;
  const std::size_t sentences = uniform(rng, 1, max_sentences);
  const double keep_gold = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double keep_pred = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t n = uniform(rng, 1, max_length);
    std::vector<std::string> g;
    std::vector<std::string> p;
    for (std::size_t i = 0; i < n; ++i) {
      g.emplace_back(coin(rng, keep_gold) ? kKeep : kDel);
      p.emplace_back(coin(rng, keep_pred) ? kKeep : kDel);
    }
    out.gold.push_back(std::move(g));
    out.pred.push_back(std::move(p));
  }
  return out;
}

namespace {

struct Lexicon {
  std::vector<std::string> markers;
  std::vector<std::string> fillers;
  std::vector<std::string> heads;
  std::vector<bool> deletable;
};

Lexicon make_lexicon(std::size_t heads, std::mt19937_64& rng) {
  Lexicon lex;
  for (int i = 0; i < 6; ++i) lex.markers.push_back("m" + std::to_string(i));
  for (int i = 0; i < 10; ++i) lex.fillers.push_back("f" + std::to_string(i));
  for (std::size_t i = 0; i < heads; ++i) {
    lex.heads.push_back("h" + std::to_string(i));
    lex.deletable.push_back(i % 2 == 1);
  }
  std::shuffle(lex.deletable.begin(), lex.deletable.end(), rng);
  return lex;
}

struct Generated {
  LabeledSentence sentence;
  std::vector<bool> in_deleted;
};

Generated generate(const Lexicon& lex, std::mt19937_64& rng) {
  Generated g;
  auto& tokens = g.sentence.tokens;
  std::vector<std::string> comp;
  std::vector<std::string> ccg;
  const std::size_t constituents = uniform(rng, 2, 4);
  for (std::size_t c = 0; c < constituents; ++c) {
    std::size_t head = uniform(rng, 0, lex.heads.size() - 1);
    // The first constituent always survives so no compression is empty.
    while (c == 0 && lex.deletable[head]) head = uniform(rng, 0, lex.heads.size() - 1);
    const bool del = lex.deletable[head];
    const std::size_t fillers = uniform(rng, 0, 2);
    tokens.push_back(lex.markers[uniform(rng, 0, lex.markers.size() - 1)]);
    ccg.emplace_back("B");
    tokens.push_back(lex.heads[head]);
    ccg.emplace_back("H");
    for (std::size_t f = 0; f < fillers; ++f) {
      tokens.push_back(lex.fillers[uniform(rng, 0, lex.fillers.size() - 1)]);
      ccg.emplace_back("I");
    }
    const std::size_t span = 2 + fillers;
    for (std::size_t k = 0; k < span; ++k) {
      comp.emplace_back(del ? kDel : kKeep);
      g.in_deleted.push_back(del);
    }
  }
  g.sentence.labels[std::string(kCompressionTask)] = std::move(comp);
  g.sentence.labels[std::string(kCcgTask)] = std::move(ccg);
  return g;
}

std::vector<std::string> gaze_bins(const Generated& g, double noise, std::mt19937_64& rng) {
  std::vector<std::string> bins;
  for (std::size_t i = 0; i < g.in_deleted.size(); ++i) {
    std::size_t bin = g.in_deleted[i] ? uniform(rng, 4, 5) : uniform(rng, 1, 3);
    if (coin(rng, noise)) bin = uniform(rng, 0, 5);
    bins.push_back(std::to_string(bin));
  }
  return bins;
}

}  // namespace

ConstituentCorpus make_constituent_corpus(const ConstituentCorpusSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Lexicon lex = make_lexicon(spec.heads, rng);
  ConstituentCorpus out;
  for (std::size_t i = 0; i < spec.compression_train; ++i) out.compression_train.push_back(generate(lex, rng).sentence);
  for (std::size_t i = 0; i < spec.compression_test; ++i) out.compression_test.push_back(generate(lex, rng).sentence);
  for (std::size_t i = 0; i < spec.ccg_sentences; ++i) out.ccg_train.push_back(generate(lex, rng).sentence);
  std::vector<Generated> gaze_text;
  for (std::size_t i = 0; i < spec.gaze_sentences; ++i) gaze_text.push_back(generate(lex, rng));
  for (std::size_t reader = 0; reader < spec.gaze_readers; ++reader) {
    for (const auto& g : gaze_text) {
      LabeledSentence s;
      s.tokens = g.sentence.tokens;
      s.labels[std::string(kGazeTask)] = gaze_bins(g, spec.gaze_noise, rng);
      out.gaze_train.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace gazecomp::selftest
