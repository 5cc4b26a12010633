#include "persona/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "persona/errors.hpp"

namespace persona {

namespace {

constexpr char kBinaryMagic[8] = {'P', 'G', 'E', 'M', 'B', '1', '\0', '\0'};

static_assert(std::endian::native == std::endian::little,
              "binary embedding I/O assumes a little-endian host");

bool is_token_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

EmbeddingTable read_jsonl_embeddings(std::istream& in, const std::string& name) {
  EmbeddingTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  long dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = name + ":" + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("vector") || !obj["vector"].is_array()) {
      throw DataError(where + "expected {\"id\": str, \"vector\": [float...]}");
    }
    std::vector<double> v;
    v.reserve(obj["vector"].size());
    for (const auto& x : obj["vector"]) {
      if (!x.is_number()) throw DataError(where + "non-numeric vector entry");
      v.push_back(x.get<double>());
    }
    if (dim < 0) dim = static_cast<long>(v.size());
    if (static_cast<long>(v.size()) != dim) {
      throw DataError(where + "dimension mismatch: expected " + std::to_string(dim) + ", got " +
                      std::to_string(v.size()));
    }
    table.ids.push_back(obj["id"].get<std::string>());
    rows.push_back(std::move(v));
  }
  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), std::max(dim, 0L));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (long j = 0; j < dim; ++j) table.vectors(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return table;
}

template <typename T>
T read_le(std::istream& in, const std::string& name) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError(name + ": truncated binary embedding file");
  return value;
}

EmbeddingTable read_binary_embeddings(std::istream& in, const std::string& name) {
  char magic[8];
  in.read(magic, sizeof(magic));
  const auto n_rows = read_le<std::uint32_t>(in, name);
  const auto dim = read_le<std::uint32_t>(in, name);
  EmbeddingTable table;
  table.vectors.resize(n_rows, dim);
  std::vector<float> row(dim);
  for (std::uint32_t i = 0; i < n_rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw DataError(name + ": truncated binary embedding file");
    for (std::uint32_t j = 0; j < dim; ++j) table.vectors(i, j) = row[j];
  }
  std::string id;
  while (table.ids.size() < n_rows && std::getline(in, id)) {
    if (!id.empty() && id.back() == '\r') id.pop_back();
    table.ids.push_back(id);
  }
  if (table.ids.size() != n_rows) {
    throw DataError(name + ": expected " + std::to_string(n_rows) + " ids, found " +
                    std::to_string(table.ids.size()));
  }
  return table;
}

}  // namespace

void validate(const FeatureMatrix& m) {
  if (m.row_ids.size() != m.rows()) {
    throw DataError("feature matrix has " + std::to_string(m.rows()) + " rows but " +
                    std::to_string(m.row_ids.size()) + " ids");
  }
  if (!m.values.allFinite()) throw DataError("feature matrix contains non-finite values");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

long Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

double Vocabulary::idf(std::size_t index) const {
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[index]))) +
         1.0;
}

Vocabulary fit_vocabulary(const Dataset& ds, std::size_t min_df) {
  if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");
  if (ds.empty()) throw std::invalid_argument("cannot fit a vocabulary on an empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& rec : ds.records) {
    auto toks = tokenize(rec.text);
    std::set<std::string> unique(std::make_move_iterator(toks.begin()),
                                 std::make_move_iterator(toks.end()));
    for (const auto& t : unique) ++df[t];
  }
  Vocabulary vocab;
  vocab.n_docs_ = ds.size();
  for (auto& [token, count] : df) {
    if (count < min_df) continue;
    vocab.index_.emplace(token, vocab.tokens_.size());
    vocab.tokens_.push_back(token);
    vocab.df_.push_back(count);
  }
  return vocab;
}

FeatureMatrix bow_transform(const Dataset& ds, const Vocabulary& vocab) {
  FeatureMatrix m;
  m.values = Matrix::Zero(static_cast<Eigen::Index>(ds.size()),
                          static_cast<Eigen::Index>(vocab.size()));
  m.row_ids = ds.ids();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (const auto& tok : tokenize(ds.records[i].text)) {
      const long j = vocab.index_of(tok);
      if (j >= 0) m.values(static_cast<Eigen::Index>(i), j) += 1.0;
    }
  }
  return m;
}

FeatureMatrix tfidf_transform(const Dataset& ds, const Vocabulary& vocab) {
  FeatureMatrix m = bow_transform(ds, vocab);
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    m.values.col(j) *= vocab.idf(static_cast<std::size_t>(j));
  }
  return l2_normalize(std::move(m));
}

FeatureMatrix l2_normalize(FeatureMatrix m) {
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const double norm = m.values.row(i).norm();
    if (norm > 0.0) m.values.row(i) /= norm;
  }
  return m;
}

EmbeddingTable read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  char head[8] = {};
  in.read(head, sizeof(head));
  const bool binary = in.gcount() == 8 && std::memcmp(head, kBinaryMagic, 8) == 0;
  in.clear();
  in.seekg(0);
  auto table = binary ? read_binary_embeddings(in, path.string())
                      : read_jsonl_embeddings(in, path.string());
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    if (!seen.emplace(table.ids[i], i).second) {
      throw DataError(path.string() + ": duplicate embedding id \"" + table.ids[i] + "\"");
    }
  }
  return table;
}

void write_embeddings_jsonl(std::ostream& out, const FeatureMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json obj;
    obj["id"] = m.row_ids[i];
    auto vec = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      vec.push_back(m.values(static_cast<Eigen::Index>(i), j));
    }
    obj["vector"] = std::move(vec);
    out << obj.dump() << '\n';
  }
}

void write_embeddings_binary(std::ostream& out, const FeatureMatrix& m) {
  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  const auto n_rows = static_cast<std::uint32_t>(m.rows());
  const auto dim = static_cast<std::uint32_t>(m.dim());
  out.write(reinterpret_cast<const char*>(&n_rows), sizeof(n_rows));
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  for (std::uint32_t i = 0; i < n_rows; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      const auto v = static_cast<float>(m.values(i, j));
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  for (const auto& id : m.row_ids) out << id << '\n';
}

FeatureMatrix align_embeddings(const EmbeddingTable& table, const Dataset& ds) {
  std::unordered_map<std::string_view, Eigen::Index> row_of;
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    row_of.emplace(table.ids[i], static_cast<Eigen::Index>(i));
  }
  FeatureMatrix m;
  m.values.resize(static_cast<Eigen::Index>(ds.size()), table.vectors.cols());
  m.row_ids.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& id = ds.records[i].id;
    const auto it = row_of.find(id);
    if (it == row_of.end()) throw DataError("no embedding for id \"" + id + "\"");
    if (!table.vectors.row(it->second).allFinite()) {
      throw DataError("embedding for id \"" + id + "\" contains non-finite values");
    }
    m.values.row(static_cast<Eigen::Index>(i)) = table.vectors.row(it->second);
    m.row_ids.push_back(id);
  }
  return m;
}

FeatureMatrix load_embeddings(const std::filesystem::path& path, const Dataset& ds) {
  return align_embeddings(read_embedding_file(path), ds);
}

}  // namespace persona
