#ifndef GAZECOMP_CONLL_HPP
#define GAZECOMP_CONLL_HPP

// Two-column `token␉label` corpora with blank-line sentence separators. The
// same envelope carries compression labels, CCG tags and gaze bins.

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazecomp {

struct ConllSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

/// Accepts CRLF. Malformed lines throw DataError with `source:line`.
std::vector<ConllSentence> read_conll(std::istream& in, const std::string& source = "<stream>");
std::vector<ConllSentence> read_conll_file(const std::filesystem::path& path);

void write_conll(std::ostream& out, std::span<const ConllSentence> sentences);
void write_conll_file(const std::filesystem::path& path, std::span<const ConllSentence> sentences);

/// Whitespace tokenization of one line.
std::vector<std::string> split_tokens(std::string_view line);

/// Removes one trailing '\r', if present.
std::string_view strip_cr(std::string_view line);

}  // namespace gazecomp

#endif  // GAZECOMP_CONLL_HPP
