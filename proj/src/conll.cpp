#include "gazecomp/conll.hpp"

#include <fstream>

#include "gazecomp/error.hpp"
#include "gazecomp/log.hpp"

namespace gazecomp {

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<ConllSentence> read_conll(std::istream& in, const std::string& source) {
  std::vector<ConllSentence> out;
  ConllSentence current;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (!current.tokens.empty()) out.push_back(std::move(current));
      current = {};
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected `token<TAB>label`");
    }
    current.tokens.emplace_back(line.substr(0, tab));
    current.labels.emplace_back(line.substr(tab + 1));
  }
  if (!current.tokens.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<ConllSentence> read_conll_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto sentences = read_conll(in, path.string());
  if (sentences.empty()) log_warning(path.string() + ": no sentences");
  return sentences;
}

void write_conll(std::ostream& out, std::span<const ConllSentence> sentences) {
  bool first = true;
  for (const auto& s : sentences) {
    if (s.tokens.size() != s.labels.size()) {
      throw DataError("write_conll: token/label count mismatch");
    }
    if (!first) out << '\n';
    first = false;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) out << s.tokens[i] << '\t' << s.labels[i] << '\n';
  }
}

void write_conll_file(const std::filesystem::path& path, std::span<const ConllSentence> sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_conll(out, sentences);
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace gazecomp
