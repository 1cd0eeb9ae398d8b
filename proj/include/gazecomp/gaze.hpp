#ifndef GAZECOMP_GAZE_HPP
#define GAZECOMP_GAZE_HPP

// Reading measures from fixation logs: first-pass duration, regression
// duration, and their per-reader six-way discretization.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazecomp/conll.hpp"

namespace gazecomp {

enum class GazeMeasure { first_pass, regression };

std::string_view measure_name(GazeMeasure measure);
GazeMeasure parse_measure(std::string_view name);

struct FixationEvent {
  std::string reader_id;
  std::string sentence_id;
  std::size_t word_index = 0;
  std::uint32_t duration_ms = 0;
  std::uint64_t order = 0;
};

/// word_index -> milliseconds. Words absent from the map were not fixated.
using WordDurations = std::map<std::size_t, std::uint64_t>;

/// Events of one reader on one sentence, sorted by `order`. Throws DataError
/// when the order is not strictly increasing.
WordDurations compute_first_pass(std::span<const FixationEvent> events);
WordDurations compute_regression(std::span<const FixationEvent> events);

struct ReaderStats {
  std::string reader_id;
  GazeMeasure measure = GazeMeasure::first_pass;
  double mean = 0.0;
  double sd = 0.0;  // population SD over the non-zero values
  std::size_t count_nonzero = 0;
};

/// Zeros are excluded. Throws DataError if no value is non-zero.
ReaderStats reader_stats(std::string reader_id, GazeMeasure measure, std::span<const std::uint64_t> values);

/// Bin 0 for 0 ms; otherwise 1..5 by distance from the reader mean in SD
/// units: [-inf, -1), [-1, -0.5), [-0.5, 0.5), [0.5, 1], (1, inf).
/// With sd == 0 every non-zero value lands in bin 3.
int discretize_measure(double value, const ReaderStats& stats);

struct WordGaze {
  std::string reader_id;
  std::string sentence_id;
  std::size_t word_index = 0;
  std::uint64_t first_pass_ms = 0;
  std::uint64_t regression_ms = 0;
  int fp_bin = 0;
  int regr_bin = 0;
};

struct GazeSentence {
  std::string id;
  std::vector<std::string> tokens;
};

/// `reader␉sentence␉word_index␉duration_ms` lines; `#` lines and blank lines
/// are skipped. Event order is line order.
std::vector<FixationEvent> parse_fixations(std::istream& in, const std::string& source = "<stream>");
std::vector<FixationEvent> parse_fixation_file(const std::filesystem::path& path);

/// `sentence_id␉tok tok tok` lines.
std::vector<GazeSentence> parse_gaze_sentences(std::istream& in, const std::string& source = "<stream>");
std::vector<GazeSentence> parse_gaze_sentence_file(const std::filesystem::path& path);

/// Measures and bins for every (reader, sentence, word). Each sentence's
/// fixations are processed independently; statistics pool all of a reader's
/// words. Readers appear in order of first occurrence.
std::vector<WordGaze> compute_word_gaze(std::span<const FixationEvent> events, std::span<const GazeSentence> sentences);

/// Token/bin sentences for one reader and measure, in `sentences` order.
/// Throws DataError listing any (sentence, word) positions without a WordGaze.
std::vector<ConllSentence> gaze_label_sentences(std::span<const GazeSentence> sentences,
                                                std::span<const WordGaze> gaze, const std::string& reader_id,
                                                GazeMeasure measure);

/// Writes `<reader>.<measure>.conll` for each reader and both measures.
/// Returns the written paths.
std::vector<std::filesystem::path> export_gaze_corpus(std::span<const GazeSentence> sentences,
                                                      std::span<const WordGaze> gaze,
                                                      const std::filesystem::path& out_dir);

}  // namespace gazecomp

#endif  // GAZECOMP_GAZE_HPP
