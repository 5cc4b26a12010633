#include "persona/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "persona/errors.hpp"

namespace persona {

namespace {

constexpr double kScoreTolerance = 1e-6;

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::span<const double> row_span(const Matrix& m, NodeIndex i) {
  return {m.data() + static_cast<std::size_t>(m.cols()) * i, static_cast<std::size_t>(m.cols())};
}

std::string pair_name(NodeIndex u, NodeIndex v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
  }
  const double na = std::sqrt(dot(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(dot(b.data(), b.data(), b.size()));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a.data(), b.data(), a.size()) / (na * nb);
}

NeighborLists knn_neighbors(const Matrix& features, std::size_t k,
                            const std::vector<bool>* node_mask) {
  const auto n = static_cast<std::size_t>(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  if (node_mask != nullptr && node_mask->size() != n) {
    throw std::invalid_argument("knn_neighbors: node mask size does not match row count");
  }
  auto active = [&](NodeIndex i) { return node_mask == nullptr || (*node_mask)[i]; };

  std::vector<NodeIndex> candidates;
  for (NodeIndex i = 0; i < n; ++i) {
    if (active(i)) candidates.push_back(i);
  }
  if (k < 1 || k >= candidates.size()) {
    throw std::invalid_argument("knn_neighbors: k must satisfy 1 <= k < " +
                                std::to_string(candidates.size()) + ", got " + std::to_string(k));
  }

  std::vector<double> norms(n);
  for (NodeIndex i = 0; i < n; ++i) {
    const double* r = features.data() + d * i;
    norms[i] = std::sqrt(dot(r, r, d));
  }

  NeighborLists out(n);
  std::vector<double> sim(n, 0.0);
  std::vector<NodeIndex> order;
  order.reserve(candidates.size());
  for (NodeIndex v : candidates) {
    const double* rv = features.data() + d * v;
    order.clear();
    for (NodeIndex u : candidates) {
      if (u == v) continue;
      const double denom = norms[v] * norms[u];
      sim[u] = denom == 0.0 ? 0.0 : dot(rv, features.data() + d * u, d) / denom;
      order.push_back(u);
    }
    auto closer = [&](NodeIndex a, NodeIndex b) {
      return sim[a] > sim[b] || (sim[a] == sim[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      closer);
    out[v].reserve(k);
    for (std::size_t j = 0; j < k; ++j) out[v].push_back({order[j], sim[order[j]]});
  }
  return out;
}

CosineScorer::CosineScorer(const Matrix& features) : features_(features) {}

double CosineScorer::score(NodeIndex src, NodeIndex dst) const {
  return 0.5 * (1.0 + cosine_similarity(row_span(features_, src), row_span(features_, dst)));
}

PrecomputedScorer::PrecomputedScorer(std::map<std::pair<std::string, std::string>, double> scores,
                                     std::vector<std::string> node_ids)
    : scores_(std::move(scores)), node_ids_(std::move(node_ids)) {}

PrecomputedScorer PrecomputedScorer::from_stream(std::istream& in,
                                                 std::vector<std::string> node_ids) {
  std::map<std::pair<std::string, std::string>, double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "edge scores line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("src") || !obj["src"].is_string() ||
        !obj.contains("dst") || !obj["dst"].is_string() || !obj.contains("score") ||
        !obj["score"].is_number()) {
      throw DataError(where + "expected {\"src\": str, \"dst\": str, \"score\": float}");
    }
    auto key = std::make_pair(obj["src"].get<std::string>(), obj["dst"].get<std::string>());
    if (!scores.emplace(std::move(key), obj["score"].get<double>()).second) {
      throw DataError(where + "duplicate score for (" + obj["src"].get<std::string>() + "," +
                      obj["dst"].get<std::string>() + ")");
    }
  }
  return PrecomputedScorer(std::move(scores), std::move(node_ids));
}

PrecomputedScorer PrecomputedScorer::from_file(const std::filesystem::path& path,
                                               std::vector<std::string> node_ids) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge-score file " + path.string());
  return from_stream(in, std::move(node_ids));
}

double PrecomputedScorer::score(NodeIndex src, NodeIndex dst) const {
  const auto it = scores_.find({node_ids_.at(src), node_ids_.at(dst)});
  if (it == scores_.end()) {
    throw DataError("missing score for pair (" + node_ids_[src] + "," + node_ids_[dst] + ")");
  }
  return it->second;
}

std::vector<EdgeScore> score_pairs(const NeighborLists& neighbors, const EdgeScorer& scorer) {
  std::set<std::pair<NodeIndex, NodeIndex>> pairs;
  for (NodeIndex v = 0; v < neighbors.size(); ++v) {
    for (const auto& nb : neighbors[v]) {
      if (nb.index == v) throw std::invalid_argument("neighbor list contains a self pair");
      pairs.emplace(std::min(v, nb.index), std::max(v, nb.index));
    }
  }
  std::vector<EdgeScore> out;
  out.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    const double forward = scorer.score(u, v);
    const double backward = scorer.score(v, u);
    const double s = 0.5 * (forward + backward);
    if (!std::isfinite(s) || s < -kScoreTolerance || s > 1.0 + kScoreTolerance) {
      throw DataError("score " + std::to_string(s) + " for pair " + pair_name(u, v) +
                      " lies outside [0, 1]");
    }
    out.push_back({u, v, std::clamp(s, 0.0, 1.0)});
  }
  return out;
}

PersonaGraph::PersonaGraph(std::size_t n_nodes, std::vector<WeightedEdge> edges,
                           std::vector<std::string> ids)
    : n_nodes_(n_nodes), edges_(std::move(edges)), adjacency_(n_nodes), ids_(std::move(ids)) {
  if (!ids_.empty() && ids_.size() != n_nodes_) {
    throw DataError("graph has " + std::to_string(n_nodes_) + " nodes but " +
                    std::to_string(ids_.size()) + " ids");
  }
  std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (e.u == e.v) throw DataError("self-loop on node " + std::to_string(e.u));
    if (e.u > e.v) throw DataError("edge " + pair_name(e.u, e.v) + " is not stored as u < v");
    if (e.v >= n_nodes_) throw DataError("edge " + pair_name(e.u, e.v) + " out of range");
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) {
      throw DataError("edge " + pair_name(e.u, e.v) + " weight outside [0, 1]");
    }
    if (i > 0 && edges_[i - 1].u == e.u && edges_[i - 1].v == e.v) {
      throw DataError("duplicate edge " + pair_name(e.u, e.v));
    }
    adjacency_[e.u].push_back({e.v, e.weight});
    adjacency_[e.v].push_back({e.u, e.weight});
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Adjacent& a, const Adjacent& b) { return a.node < b.node; });
  }
}

PersonaGraph PersonaGraph::aligned_to(const std::vector<std::string>& target_ids) const {
  if (ids_ == target_ids) return *this;
  if (target_ids.size() != n_nodes_ || ids_.size() != n_nodes_) {
    throw DataError("graph nodes do not match the corpus (" + std::to_string(n_nodes_) +
                    " graph nodes, " + std::to_string(target_ids.size()) + " records)");
  }
  std::unordered_map<std::string_view, NodeIndex> target_pos;
  for (NodeIndex i = 0; i < target_ids.size(); ++i) target_pos.emplace(target_ids[i], i);
  std::vector<NodeIndex> remap(n_nodes_);
  for (NodeIndex i = 0; i < n_nodes_; ++i) {
    const auto it = target_pos.find(ids_[i]);
    if (it == target_pos.end()) throw DataError("graph node \"" + ids_[i] + "\" not in corpus");
    remap[i] = it->second;
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(edges_.size());
  for (const auto& e : edges_) {
    const auto a = remap[e.u];
    const auto b = remap[e.v];
    edges.push_back({std::min(a, b), std::max(a, b), e.weight});
  }
  return PersonaGraph(n_nodes_, std::move(edges), target_ids);
}

PersonaGraph build_graph(const FeatureMatrix& features, const GraphOptions& options,
                         const EdgeScorer& scorer) {
  const auto* mask = options.node_mask.empty() ? nullptr : &options.node_mask;
  const auto neighbors = knn_neighbors(features.values, options.k, mask);
  const auto scores = score_pairs(neighbors, scorer);
  std::vector<WeightedEdge> edges;
  edges.reserve(scores.size());
  for (const auto& s : scores) edges.push_back({s.src, s.dst, s.score});
  return PersonaGraph(features.rows(), std::move(edges), features.row_ids);
}

void write_graph(std::ostream& out, const PersonaGraph& g) {
  nlohmann::ordered_json doc;
  doc["n_nodes"] = g.node_count();
  doc["ids"] = g.ids();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) edges.push_back({e.u, e.v, e.weight});
  doc["edges"] = std::move(edges);
  out << doc.dump() << '\n';
}

PersonaGraph read_graph(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed graph file (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("n_nodes") || !doc["n_nodes"].is_number_unsigned() ||
      !doc.contains("edges") || !doc["edges"].is_array()) {
    throw DataError("graph file must contain \"n_nodes\" and \"edges\"");
  }
  const auto n = doc["n_nodes"].get<std::size_t>();
  std::vector<std::string> ids;
  if (doc.contains("ids")) {
    if (!doc["ids"].is_array()) throw DataError("graph \"ids\" must be an array");
    for (const auto& id : doc["ids"]) {
      if (!id.is_string()) throw DataError("graph ids must be strings");
      ids.push_back(id.get<std::string>());
    }
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(doc["edges"].size());
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() ||
        !e[1].is_number_unsigned() || !e[2].is_number()) {
      throw DataError("graph edges must be [u, v, weight] with non-negative integer nodes");
    }
    edges.push_back({e[0].get<NodeIndex>(), e[1].get<NodeIndex>(), e[2].get<double>()});
  }
  return PersonaGraph(n, std::move(edges), std::move(ids));
}

void save_graph(const PersonaGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_graph(out, g);
}

PersonaGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file " + path.string());
  return read_graph(in);
}

}  // namespace persona
