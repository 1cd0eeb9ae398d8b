#include "gazecomp/compression_data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "gazecomp/error.hpp"
#include "gazecomp/log.hpp"

namespace gazecomp {

const std::vector<std::string>& LabeledSentence::labels_for(std::string_view task) const {
  auto it = labels.find(task);
  if (it == labels.end()) throw DataError("sentence has no `" + std::string(task) + "` labels");
  return it->second;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::vector<std::size_t> lcs_alignment(std::span<const std::string> source, std::span<const std::string> target,
                                       bool ignore_case) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  auto eq = [&](std::size_t i, std::size_t j) {
    return ignore_case ? iequals(source[i], target[j]) : source[i] == target[j];
  };
  // suffix[i][j] = LCS length of source[i:] and target[j:]
  std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix[i][j] = eq(i, j) ? suffix[i + 1][j + 1] + 1 : std::max(suffix[i + 1][j], suffix[i][j + 1]);
    }
  }
  // Walk forward taking a match whenever it stays optimal. Skipping a target
  // token is preferred over skipping a source token, so each source position
  // is used as soon as any optimal alignment can use it.
  std::vector<std::size_t> kept;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m) {
    if (eq(i, j) && suffix[i][j] == suffix[i + 1][j + 1] + 1) {
      kept.push_back(i);
      ++i;
      ++j;
    } else if (suffix[i][j + 1] == suffix[i][j]) {
      ++j;
    } else {
      ++i;
    }
  }
  return kept;
}

LabeledSentence align_and_label(const SentencePair& pair) {
  const std::string where = pair.line > 0 ? "line " + std::to_string(pair.line) + ": " : std::string();
  if (pair.source.empty() || pair.compression.empty()) throw DataError(where + "empty source or compression");
  auto kept = lcs_alignment(pair.source, pair.compression, false);
  if (kept.size() != pair.compression.size()) kept = lcs_alignment(pair.source, pair.compression, true);
  if (kept.size() != pair.compression.size()) {
    throw DataError(where + "compression is not a subsequence of the source (" + std::to_string(kept.size()) + " of " +
                    std::to_string(pair.compression.size()) + " tokens aligned)");
  }
  LabeledSentence out;
  out.tokens = pair.source;
  auto& labels = out.labels[std::string(kCompressionTask)];
  labels.assign(pair.source.size(), std::string(kDel));
  for (std::size_t i : kept) labels[i] = std::string(kKeep);
  return out;
}

LabelingResult label_corpus(std::span<const SentencePair> pairs) {
  LabelingResult result;
  for (const auto& pair : pairs) {
    try {
      result.sentences.push_back(align_and_label(pair));
    } catch (const DataError& e) {
      result.rejected.push_back({pair.line, e.what()});
    }
  }
  return result;
}

CorpusStats corpus_stats(std::span<const LabeledSentence> corpus, std::string_view task) {
  CorpusStats stats;
  stats.sentence_count = corpus.size();
  if (corpus.empty()) return stats;
  std::size_t tokens = 0;
  std::size_t deleted = 0;
  std::unordered_set<std::string> types;
  for (const auto& s : corpus) {
    tokens += s.tokens.size();
    types.insert(s.tokens.begin(), s.tokens.end());
    const auto& labels = s.labels_for(task);
    deleted += static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kDel));
  }
  stats.mean_length = static_cast<double>(tokens) / static_cast<double>(corpus.size());
  if (tokens > 0) {
    stats.type_token_ratio = static_cast<double>(types.size()) / static_cast<double>(tokens);
    stats.deletion_rate = static_cast<double>(deleted) / static_cast<double>(tokens);
  }
  return stats;
}

std::vector<SentencePair> parse_parallel(std::istream& in, const std::string& source) {
  std::vector<SentencePair> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto tab = line.find('\t');
    SentencePair pair;
    pair.line = line_no;
    if (tab != std::string_view::npos && line.find('\t', tab + 1) == std::string_view::npos) {
      pair.source = split_tokens(line.substr(0, tab));
      pair.compression = split_tokens(line.substr(tab + 1));
    }
    if (pair.source.empty() || pair.compression.empty()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected `source tokens<TAB>compression tokens`");
    }
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<SentencePair> parse_parallel_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto pairs = parse_parallel(in, path.string());
  if (pairs.empty()) log_warning(path.string() + ": no sentence pairs");
  return pairs;
}

std::vector<LabeledSentence> parse_labeled(std::istream& in, std::string_view task, const std::string& source) {
  std::vector<LabeledSentence> out;
  for (auto& s : read_conll(in, source)) {
    LabeledSentence ls;
    ls.tokens = std::move(s.tokens);
    ls.labels.emplace(std::string(task), std::move(s.labels));
    out.push_back(std::move(ls));
  }
  return out;
}

std::vector<LabeledSentence> parse_labeled_file(const std::filesystem::path& path, std::string_view task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto corpus = parse_labeled(in, task, path.string());
  if (corpus.empty()) log_warning(path.string() + ": empty corpus");
  return corpus;
}

void write_labeled(std::ostream& out, std::span<const LabeledSentence> corpus, std::string_view task) {
  std::vector<ConllSentence> rows;
  rows.reserve(corpus.size());
  for (const auto& s : corpus) rows.push_back({s.tokens, s.labels_for(task)});
  write_conll(out, rows);
}

void write_labeled_file(const std::filesystem::path& path, std::span<const LabeledSentence> corpus,
                        std::string_view task) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_labeled(out, corpus, task);
}

std::string compressed_surface(std::span<const std::string> tokens, std::span<const std::string> labels) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size() && i < labels.size(); ++i) {
    if (labels[i] != kKeep) continue;
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace gazecomp
