#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "persona/corpus.hpp"
#include "persona/linalg.hpp"

namespace persona {

// Row-per-statement feature vectors. Rows are aligned with row_ids.
struct FeatureMatrix {
  Matrix values;
  std::vector<std::string> row_ids;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
};

// Throws DataError on NaN/Inf entries or a row_ids/rows mismatch.
void validate(const FeatureMatrix& m);

// Lowercase, split on runs of ASCII non-alphanumerics. Bytes >= 0x80 stay
// inside tokens so multi-byte UTF-8 words are not torn apart.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return tokens_.size(); }
  std::size_t document_count() const { return n_docs_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // -1 when the token is out of vocabulary.
  long index_of(std::string_view token) const;
  std::size_t document_frequency(std::size_t index) const { return df_[index]; }
  double idf(std::size_t index) const;

  friend Vocabulary fit_vocabulary(const Dataset& ds, std::size_t min_df);

 private:
  std::vector<std::string> tokens_;  // sorted lexicographically
  std::vector<std::size_t> df_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t n_docs_ = 0;
};

// Throws std::invalid_argument for min_df == 0 or an empty corpus.
Vocabulary fit_vocabulary(const Dataset& ds, std::size_t min_df = 1);

FeatureMatrix bow_transform(const Dataset& ds, const Vocabulary& vocab);

// tf * (ln((1 + N) / (1 + df)) + 1), then rows scaled to unit L2 norm.
FeatureMatrix tfidf_transform(const Dataset& ds, const Vocabulary& vocab);

FeatureMatrix l2_normalize(FeatureMatrix m);

// Embedding files: JSONL ({"id": ..., "vector": [...]}) or binary with the
// "PGEMB1\0\0" magic. The format is detected from the first bytes.
struct EmbeddingTable {
  std::vector<std::string> ids;
  Matrix vectors;
};

EmbeddingTable read_embedding_file(const std::filesystem::path& path);
void write_embeddings_jsonl(std::ostream& out, const FeatureMatrix& m);
void write_embeddings_binary(std::ostream& out, const FeatureMatrix& m);

// Rows follow ds order. Throws DataError naming any missing id, on
// inconsistent dimensions, and on non-finite values.
FeatureMatrix align_embeddings(const EmbeddingTable& table, const Dataset& ds);
FeatureMatrix load_embeddings(const std::filesystem::path& path, const Dataset& ds);

}  // namespace persona
