#include "gazecomp/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "gazecomp/conll.hpp"
#include "gazecomp/error.hpp"
#include "gazecomp/log.hpp"

namespace gazecomp {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Vocabulary::Vocabulary() { add(std::string(kUnk)); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (const auto& t : tokens) {
    if (index_.contains(t)) throw DataError("duplicate vocabulary token: " + t);
    add(t);
  }
  if (!index_.contains(std::string(kUnk))) add(std::string(kUnk));
  unk_ = index_.at(std::string(kUnk));
}

ad::Index Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const auto id = static_cast<ad::Index>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  if (token == kUnk) unk_ = id;
  return id;
}

std::optional<ad::Index> Vocabulary::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

ad::Index Vocabulary::lookup(std::string_view token, bool lowercase_fallback) const {
  if (auto id = find(token)) return *id;
  if (lowercase_fallback) {
    if (auto id = find(to_lower(token))) return *id;
  }
  return unk_;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& t : tokens_) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

namespace {

bool is_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

PretrainedEmbeddings load_embeddings(std::istream& in, std::optional<ad::Index> expected_dim,
                                     const std::string& source) {
  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t duplicates = 0;
  std::optional<ad::Index> dim = expected_dim;

  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    auto fields = split_tokens(strip_cr(raw));
    if (fields.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (first_content) {
      first_content = false;
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) continue;
    }
    if (fields.size() < 2) throw DataError(where + ": expected `word v1 ... vD`");
    const auto this_dim = static_cast<ad::Index>(fields.size() - 1);
    if (!dim) dim = this_dim;
    if (this_dim != *dim) {
      throw DataError(where + ": dimension " + std::to_string(this_dim) + " differs from " + std::to_string(*dim));
    }
    std::vector<double> row(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto& f = fields[k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k - 1]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError(where + ": invalid number `" + f + "`");
      }
    }
    if (seen.contains(fields[0])) {
      ++duplicates;
      log_warning(where + ": duplicate word `" + fields[0] + "` ignored");
      continue;
    }
    seen.emplace(fields[0], words.size());
    words.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (words.empty()) throw DataError(source + ": no embeddings");

  PretrainedEmbeddings out;
  const bool has_unk = seen.contains(std::string(Vocabulary::kUnk));
  out.vocab = Vocabulary(words);
  out.duplicates = duplicates;
  out.matrix.resize(out.vocab.size(), *dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (ad::Index k = 0; k < *dim; ++k) out.matrix(static_cast<ad::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  if (!has_unk) {
    out.matrix.row(out.vocab.unk_index()) =
        out.matrix.topRows(static_cast<ad::Index>(rows.size())).colwise().mean();
  }
  return out;
}

PretrainedEmbeddings load_embeddings(const std::filesystem::path& path, std::optional<ad::Index> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return load_embeddings(in, expected_dim, path.string());
}

ad::Tensor lookup(std::span<const std::string> tokens, const Vocabulary& vocab, const ad::Tensor& matrix,
                  bool lowercase_fallback) {
  ad::Tensor out(static_cast<ad::Index>(tokens.size()), matrix.cols());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.row(static_cast<ad::Index>(i)) = matrix.row(vocab.lookup(tokens[i], lowercase_fallback));
  }
  return out;
}

}  // namespace gazecomp
