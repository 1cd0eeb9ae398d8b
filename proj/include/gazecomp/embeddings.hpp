#ifndef GAZECOMP_EMBEDDINGS_HPP
#define GAZECOMP_EMBEDDINGS_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gazecomp/autodiff.hpp"

namespace gazecomp {

/// Dense token indices with a distinguished UNK entry.
class Vocabulary {
 public:
  static constexpr std::string_view kUnk = "<UNK>";

  /// Empty vocabulary except for UNK at index 0.
  Vocabulary();

  /// Builds from an explicit token list. UNK is appended if missing.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Returns the existing index when the token is already present.
  ad::Index add(const std::string& token);

  std::optional<ad::Index> find(std::string_view token) const;

  /// Exact match, then (optionally) the lowercased form, then UNK.
  ad::Index lookup(std::string_view token, bool lowercase_fallback) const;

  ad::Index size() const { return static_cast<ad::Index>(tokens_.size()); }
  ad::Index unk_index() const { return unk_; }
  const std::string& token(ad::Index i) const { return tokens_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// FNV-1a over the token list; recorded in model manifests.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, ad::Index> index_;
  ad::Index unk_ = 0;
};

struct PretrainedEmbeddings {
  Vocabulary vocab;
  ad::Tensor matrix;  // vocab.size() x dim
  std::size_t duplicates = 0;

  ad::Index dim() const { return matrix.cols(); }
};

/// Text format `word v1 ... vD`; an optional `<count> <dim>` header is
/// skipped. Duplicates keep their first vector. UNK is the mean of all loaded
/// vectors unless the file defines it.
PretrainedEmbeddings load_embeddings(std::istream& in, std::optional<ad::Index> expected_dim = {},
                                     const std::string& source = "<stream>");
PretrainedEmbeddings load_embeddings(const std::filesystem::path& path, std::optional<ad::Index> expected_dim = {});

/// One row per token, never fails.
ad::Tensor lookup(std::span<const std::string> tokens, const Vocabulary& vocab, const ad::Tensor& matrix,
                  bool lowercase_fallback);

std::string to_lower(std::string_view s);

}  // namespace gazecomp

#endif  // GAZECOMP_EMBEDDINGS_HPP
