#include "persona/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "persona/errors.hpp"

namespace persona {

namespace {

constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "Experiences", "Characteristics", "Routines or Habits", "Goals or Plans", "Relationship"};

PersonaRecord parse_record(const std::string& line, std::size_t line_no) {
  auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(where() + "malformed JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw DataError(where() + "expected a JSON object");
  for (const char* field : {"id", "text", "labels"}) {
    if (!obj.contains(field)) throw DataError(where() + "missing field \"" + field + "\"");
  }
  if (!obj["id"].is_string()) throw DataError(where() + "\"id\" must be a string");
  if (!obj["text"].is_string()) throw DataError(where() + "\"text\" must be a string");
  if (!obj["labels"].is_array()) throw DataError(where() + "\"labels\" must be an array");

  PersonaRecord rec;
  rec.id = obj["id"].get<std::string>();
  rec.text = obj["text"].get<std::string>();
  if (rec.id.empty()) throw DataError(where() + "empty id");
  if (rec.text.empty()) throw DataError(where() + "empty text");
  for (const auto& item : obj["labels"]) {
    if (!item.is_string()) throw DataError(where() + "label entries must be strings");
    const auto name = item.get<std::string>();
    const auto label = parse_label(name);
    if (!label) throw DataError(where() + "unknown label \"" + name + "\"");
    if (rec.labels.contains(*label)) throw DataError(where() + "duplicate label \"" + name + "\"");
    rec.labels.insert(*label);
  }
  if (rec.labels.empty()) throw DataError(where() + "empty label set");
  return rec;
}

}  // namespace

std::string_view label_name(Label label) { return kLabelNames[static_cast<std::size_t>(label)]; }

std::optional<Label> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelNames[i] == name) return kAllLabels[i];
  }
  return std::nullopt;
}

LabelSet::LabelSet(std::initializer_list<Label> labels) {
  for (Label l : labels) insert(l);
}

std::size_t LabelSet::size() const {
  std::size_t n = 0;
  for (Label l : kAllLabels) n += contains(l) ? 1 : 0;
  return n;
}

std::vector<Label> LabelSet::to_vector() const {
  std::vector<Label> out;
  for (Label l : kAllLabels) {
    if (contains(l)) out.push_back(l);
  }
  return out;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.id);
  return out;
}

void validate(const Dataset& ds) {
  std::unordered_set<std::string_view> seen;
  for (const auto& r : ds.records) {
    if (r.id.empty()) throw DataError("record with empty id");
    if (r.text.empty()) throw DataError("record \"" + r.id + "\" has empty text");
    if (r.labels.empty()) throw DataError("record \"" + r.id + "\" has an empty label set");
    if (!seen.insert(r.id).second) throw DataError("duplicate id \"" + r.id + "\"");
  }
}

Dataset parse_jsonl(std::istream& in, SplitTag split) {
  Dataset ds;
  ds.split = split;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto rec = parse_record(line, line_no);
    if (!seen.insert(rec.id).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate id \"" + rec.id + "\"");
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path, SplitTag split) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  try {
    return parse_jsonl(in, split);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_jsonl(std::ostream& out, const Dataset& ds) {
  for (const auto& r : ds.records) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["text"] = r.text;
    auto labels = nlohmann::ordered_json::array();
    for (Label l : r.labels.to_vector()) labels.push_back(std::string(label_name(l)));
    obj["labels"] = std::move(labels);
    out << obj.dump() << '\n';
  }
}

void save_jsonl(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_jsonl(out, ds);
}

LabelStats label_stats(const Dataset& ds) {
  LabelStats stats;
  for (const auto& r : ds.records) {
    for (Label l : r.labels.to_vector()) ++stats.per_label[static_cast<std::size_t>(l)];
  }
  stats.overall = ds.size();
  return stats;
}

std::vector<NodeIndex> subsample_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  std::vector<NodeIndex> idx(n);
  std::iota(idx.begin(), idx.end(), NodeIndex{0});
  if (fraction == 1.0) return idx;
  // Guard against products like 0.7 * 100 landing one ulp above an integer.
  const auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(take, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Dataset subsample_fraction(const Dataset& ds, double fraction, std::uint64_t seed) {
  const auto idx = subsample_indices(ds.size(), fraction, seed);
  if (fraction == 1.0) return ds;
  Dataset out;
  out.split = ds.split;
  out.records.reserve(idx.size());
  for (auto i : idx) out.records.push_back(ds.records[i]);
  return out;
}

LabelMatrix labels_to_matrix(const Dataset& ds) {
  LabelMatrix y = LabelMatrix::Zero(static_cast<Eigen::Index>(ds.size()), kLabelCount);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      if (ds.records[i].labels.contains(kAllLabels[j])) y(static_cast<Eigen::Index>(i), j) = 1.0;
    }
  }
  return y;
}

HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  HoldoutSplit split;
  split.test = subsample_indices(n, test_fraction, seed);
  std::vector<char> is_test(n, 0);
  for (auto i : split.test) is_test[i] = 1;
  for (NodeIndex i = 0; i < n; ++i) {
    if (!is_test[i]) split.train.push_back(i);
  }
  return split;
}

Dataset concat(const Dataset& first, const Dataset& second) {
  Dataset out = first;
  out.records.insert(out.records.end(), second.records.begin(), second.records.end());
  validate(out);
  return out;
}

}  // namespace persona
