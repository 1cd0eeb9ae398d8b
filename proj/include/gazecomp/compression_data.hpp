#ifndef GAZECOMP_COMPRESSION_DATA_HPP
#define GAZECOMP_COMPRESSION_DATA_HPP

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazecomp/conll.hpp"

namespace gazecomp {

inline constexpr std::string_view kKeep = "KEEP";
inline constexpr std::string_view kDel = "DEL";
inline constexpr std::string_view kCompressionTask = "compression";

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> compression;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory
};

/// Tokens plus one label sequence per task name.
struct LabeledSentence {
  std::vector<std::string> tokens;
  std::map<std::string, std::vector<std::string>, std::less<>> labels;

  const std::vector<std::string>& labels_for(std::string_view task) const;
};

struct CorpusStats {
  std::size_t sentence_count = 0;
  double mean_length = 0.0;
  double type_token_ratio = 0.0;
  double deletion_rate = 0.0;
};

/// Source positions matched by a leftmost longest-common-subsequence
/// alignment, compared with `ignore_case` semantics.
std::vector<std::size_t> lcs_alignment(std::span<const std::string> source, std::span<const std::string> target,
                                       bool ignore_case);

/// KEEP/DEL labels such that the KEEP tokens spell the compression. Exact
/// matching first; if that fails to cover the compression, the alignment is
/// redone case-insensitively. Throws DataError if the compression is still not
/// a subsequence of the source.
LabeledSentence align_and_label(const SentencePair& pair);

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct LabelingResult {
  std::vector<LabeledSentence> sentences;
  std::vector<Rejection> rejected;
};

/// Labels every pair; unalignable pairs are counted, not fatal.
LabelingResult label_corpus(std::span<const SentencePair> pairs);

/// Statistics over source sides; `task` names the KEEP/DEL label column.
CorpusStats corpus_stats(std::span<const LabeledSentence> corpus, std::string_view task = kCompressionTask);

/// `source tokens␉compression tokens` per line; blank lines skipped.
std::vector<SentencePair> parse_parallel(std::istream& in, const std::string& source = "<stream>");
std::vector<SentencePair> parse_parallel_file(const std::filesystem::path& path);

std::vector<LabeledSentence> parse_labeled(std::istream& in, std::string_view task,
                                           const std::string& source = "<stream>");
std::vector<LabeledSentence> parse_labeled_file(const std::filesystem::path& path, std::string_view task);

void write_labeled(std::ostream& out, std::span<const LabeledSentence> corpus, std::string_view task);
void write_labeled_file(const std::filesystem::path& path, std::span<const LabeledSentence> corpus,
                        std::string_view task);

/// Tokens labeled KEEP, joined by single spaces.
std::string compressed_surface(std::span<const std::string> tokens, std::span<const std::string> labels);

}  // namespace gazecomp

#endif  // GAZECOMP_COMPRESSION_DATA_HPP
