#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persona/features.hpp"
#include "persona/linalg.hpp"

namespace persona {

// Zero when either vector is zero. Throws std::invalid_argument on a
// dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  NodeIndex index;
  double similarity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// neighbors[v] holds k entries sorted by descending similarity, ties by
// ascending index; v never appears in its own list.
using NeighborLists = std::vector<std::vector<Neighbor>>;

// Optional node_mask restricts both the query set and the candidate set:
// unmasked nodes get empty lists and are never chosen as neighbors.
NeighborLists knn_neighbors(const Matrix& features, std::size_t k,
                            const std::vector<bool>* node_mask = nullptr);

// Directional pair score, expected in [0, 1].
class EdgeScorer {
 public:
  virtual ~EdgeScorer() = default;
  virtual double score(NodeIndex src, NodeIndex dst) const = 0;
};

// (1 + cos) / 2 over the given feature rows; features must outlive the scorer.
class CosineScorer final : public EdgeScorer {
 public:
  explicit CosineScorer(const Matrix& features);
  double score(NodeIndex src, NodeIndex dst) const override;

 private:
  const Matrix& features_;
};

// Scores read from an edge-score file ({"src": id, "dst": id, "score": x}),
// e.g. entailment probabilities produced offline by an NLI model.
class PrecomputedScorer final : public EdgeScorer {
 public:
  PrecomputedScorer(std::map<std::pair<std::string, std::string>, double> scores,
                    std::vector<std::string> node_ids);
  static PrecomputedScorer from_file(const std::filesystem::path& path,
                                     std::vector<std::string> node_ids);
  static PrecomputedScorer from_stream(std::istream& in, std::vector<std::string> node_ids);

  // Throws DataError("missing score for pair (u,v)") when absent.
  double score(NodeIndex src, NodeIndex dst) const override;

 private:
  std::map<std::pair<std::string, std::string>, double> scores_;
  std::vector<std::string> node_ids_;
};

struct EdgeScore {
  NodeIndex src;  // src < dst
  NodeIndex dst;
  double score;

  friend bool operator==(const EdgeScore&, const EdgeScore&) = default;
};

// One score per unordered neighbor pair: the mean of both directional scores,
// clamped to [0, 1]. Scores further than 1e-6 outside [0, 1] are a DataError.
// Sorted by (src, dst).
std::vector<EdgeScore> score_pairs(const NeighborLists& neighbors, const EdgeScorer& scorer);

struct WeightedEdge {
  NodeIndex u;  // u < v
  NodeIndex v;
  double weight;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

class PersonaGraph {
 public:
  struct Adjacent {
    NodeIndex node;
    double weight;
    friend bool operator==(const Adjacent&, const Adjacent&) = default;
  };

  PersonaGraph() = default;
  // Validates: u < v < n_nodes, no duplicates, weights in [0, 1]. Edges are
  // stored in canonical (u, v) order. Throws DataError.
  PersonaGraph(std::size_t n_nodes, std::vector<WeightedEdge> edges,
               std::vector<std::string> ids = {});

  std::size_t node_count() const { return n_nodes_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const std::vector<Adjacent>& neighbors(NodeIndex v) const { return adjacency_[v]; }
  const std::vector<std::string>& ids() const { return ids_; }

  // Reorders nodes so that ids() == target_ids. Throws DataError when the id
  // sets differ.
  PersonaGraph aligned_to(const std::vector<std::string>& target_ids) const;

  friend bool operator==(const PersonaGraph& a, const PersonaGraph& b) {
    return a.n_nodes_ == b.n_nodes_ && a.edges_ == b.edges_ && a.ids_ == b.ids_;
  }

 private:
  std::size_t n_nodes_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;  // sorted by neighbor index
  std::vector<std::string> ids_;
};

struct GraphOptions {
  std::size_t k = 7;
  // Restrict neighbor search to these nodes; others end up isolated.
  std::vector<bool> node_mask;
};

PersonaGraph build_graph(const FeatureMatrix& features, const GraphOptions& options,
                         const EdgeScorer& scorer);

// {"n_nodes": n, "ids": [...], "edges": [[u, v, w], ...]}
void write_graph(std::ostream& out, const PersonaGraph& g);
PersonaGraph read_graph(std::istream& in);
void save_graph(const PersonaGraph& g, const std::filesystem::path& path);
PersonaGraph load_graph(const std::filesystem::path& path);

}  // namespace persona
