#ifndef GAZECOMP_SELFTEST_SYNTHETIC_HPP
#define GAZECOMP_SELFTEST_SYNTHETIC_HPP

// Seeded generators for property tests and the desk-scale training checks.

#include <cstdint>
#include <random>
#include <vector>

#include "gazecomp/compression_data.hpp"
#include "gazecomp/evaluation.hpp"
#include "gazecomp/gaze.hpp"

namespace gazecomp::selftest {

/// One reader, one sentence, up to `max_fixations` fixations over up to
/// `max_words` words, with runs and revisits.
std::vector<FixationEvent> random_fixation_stream(std::mt19937_64& rng, std::size_t max_fixations = 30,
                                                  std::size_t max_words = 10);

/// Source over a small alphabet (so tokens repeat); compression is a random
/// non-empty subsequence of it.
SentencePair random_sentence_pair(std::mt19937_64& rng, std::size_t max_source = 12);

/// Random gold/predicted KEEP/DEL corpora of equal shape.
struct LabelCorpusPair {
  LabelSequences gold;
  LabelSequences pred;
};
LabelCorpusPair random_label_corpora(std::mt19937_64& rng, std::size_t max_sentences = 20,
                                     std::size_t max_length = 15);

/// Sentences built from constituents `marker head filler*`. A constituent is
/// deleted iff its head word is of the deletable kind. The ccg column tags
/// constituent boundaries (B/H/I); the gaze column gives deletable
/// constituents high bins, with label noise.
struct ConstituentCorpusSpec {
  std::size_t heads = 40;
  std::size_t compression_train = 32;
  std::size_t compression_test = 0;
  std::size_t ccg_sentences = 32;
  std::size_t gaze_readers = 0;
  std::size_t gaze_sentences = 0;
  double gaze_noise = 0.2;
};

struct ConstituentCorpus {
  std::vector<LabeledSentence> compression_train;
  std::vector<LabeledSentence> compression_test;
  std::vector<LabeledSentence> ccg_train;
  std::vector<LabeledSentence> gaze_train;
};

ConstituentCorpus make_constituent_corpus(const ConstituentCorpusSpec& spec, std::uint64_t seed);

}  // namespace gazecomp::selftest

#endif  // GAZECOMP_SELFTEST_SYNTHETIC_HPP
