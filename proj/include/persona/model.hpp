#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "persona/corpus.hpp"
#include "persona/graph.hpp"
#include "persona/linalg.hpp"

namespace persona {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// y = x * weight + bias, with x given row-per-node.
struct Dense {
  Matrix weight;
  RowVector bias;
};

// h' = ReLU(h * w_self + agg(h) * w_neigh + bias), agg = weighted neighbor mean.
struct SageLayer {
  Matrix w_self;
  Matrix w_neigh;
  RowVector bias;
};

// dense -> ReLU -> dropout -> projection to kLabelCount logits.
struct ClassifierHead {
  Dense dense;
  Dense projection;
  double dropout_rate = 0.1;
};

struct ModelParams {
  std::vector<SageLayer> gnn_layers;
  Dense gnn_projection;
  ClassifierHead head;
  double lambda = 0.7;  // weight of the graph branch in the fused logits
};

// Gradients share the parameter layout; lambda and dropout_rate are unused.
using Gradients = ModelParams;

struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t gnn_hidden = 64;
  std::size_t gnn_layers = 2;
  std::size_t head_hidden = 0;  // 0 means input_dim
  double dropout_rate = 0.1;
  double lambda = 0.7;
};

// Glorot-uniform weights, zero biases. Throws std::invalid_argument on a bad shape.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);

Gradients zeros_like(const ModelParams& params);

enum class ParamGroup { Head, Gnn };

// Visits every trainable tensor in a fixed order: gnn layers (w_self, w_neigh,
// bias), gnn projection (weight, bias), head dense (weight, bias), head
// projection (weight, bias). fn(ParamGroup, std::string_view name, span).
template <typename Params, typename Fn>
void for_each_tensor(Params& params, Fn&& fn) {
  auto visit = [&](ParamGroup group, std::string_view name, auto& tensor) {
    fn(group, name, std::span(tensor.data(), static_cast<std::size_t>(tensor.size())));
  };
  for (auto& layer : params.gnn_layers) {
    visit(ParamGroup::Gnn, "gnn.w_self", layer.w_self);
    visit(ParamGroup::Gnn, "gnn.w_neigh", layer.w_neigh);
    visit(ParamGroup::Gnn, "gnn.bias", layer.bias);
  }
  visit(ParamGroup::Gnn, "gnn_projection.weight", params.gnn_projection.weight);
  visit(ParamGroup::Gnn, "gnn_projection.bias", params.gnn_projection.bias);
  visit(ParamGroup::Head, "head.dense.weight", params.head.dense.weight);
  visit(ParamGroup::Head, "head.dense.bias", params.head.dense.bias);
  visit(ParamGroup::Head, "head.projection.weight", params.head.projection.weight);
  visit(ParamGroup::Head, "head.projection.bias", params.head.projection.bias);
}

std::size_t parameter_count(const ModelParams& params);

// Which nodes each layer has to be evaluated on so that the output rows are
// exact. Level `depth()` holds the output rows, level l - 1 holds level l plus
// all graph neighbors of level l. A plan without a graph has depth 0.
class PropagationPlan {
 public:
  static PropagationPlan full(const PersonaGraph& graph, std::size_t depth);
  static PropagationPlan for_rows(const PersonaGraph& graph, std::vector<NodeIndex> output_rows,
                                  std::size_t depth);
  // No graph: only the feature branch can run on these rows.
  static PropagationPlan rows_only(std::vector<NodeIndex> output_rows);

  std::size_t depth() const { return self_positions_.size(); }
  const std::vector<NodeIndex>& rows(std::size_t level) const { return rows_[level]; }
  const std::vector<NodeIndex>& output_rows() const { return rows_.back(); }
  // Row-normalized weighted adjacency mapping level l rows to level l + 1 rows.
  const SparseMatrix& aggregation(std::size_t l) const { return aggregation_[l]; }
  // Position of each level l + 1 row inside level l.
  const std::vector<Eigen::Index>& self_positions(std::size_t l) const {
    return self_positions_[l];
  }

 private:
  std::vector<std::vector<NodeIndex>> rows_;
  std::vector<SparseMatrix> aggregation_;
  std::vector<std::vector<Eigen::Index>> self_positions_;
};

// Intermediates of one forward pass, consumed by backward().
struct ForwardCache {
  const PropagationPlan* plan = nullptr;
  bool has_gnn = false;
  bool has_head = false;
  double lambda = 0.0;
  std::vector<Matrix> hidden;          // hidden[l] lives on plan->rows(l)
  std::vector<Matrix> aggregated;      // aggregated[l] = aggregation(l) * hidden[l]
  std::vector<Matrix> pre_activation;  // layer l output before ReLU
  Matrix head_input;
  Matrix head_pre_activation;
  Matrix head_hidden;   // after ReLU and dropout
  Matrix dropout_mask;  // empty when no dropout was applied
  Matrix z_gnn;
  Matrix z_encoder;
  Matrix z;
};

// Runs both branches on plan.output_rows(). The graph branch is skipped when
// lambda == 0 and the head when lambda == 1. `rng` drives dropout and is only
// touched when training with a positive dropout rate.
ForwardCache forward(const ModelParams& params, const Matrix& features,
                     const PropagationPlan& plan, bool training, std::mt19937_64& rng);

// Gradient of bce_with_logits(cache.z, targets) w.r.t. every parameter.
// targets are aligned with plan.output_rows().
Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const LabelMatrix& targets);

// Full-graph graph branch: stacked SAGE layers then a linear projection.
Matrix sage_forward(const Matrix& features, const PersonaGraph& graph,
                    std::span<const SageLayer> layers, const Dense& projection);

Matrix head_forward(const Matrix& features, const ClassifierHead& head, bool training,
                    std::mt19937_64& rng);

// lambda * z_gnn + (1 - lambda) * z_encoder; the endpoints return one branch
// unchanged.
Matrix combined_logits(const Matrix& z_gnn, const Matrix& z_encoder, double lambda);

// Mean over all entries of max(z, 0) - z * y + log1p(exp(-|z|)).
double bce_with_logits(const Matrix& z, const LabelMatrix& y);

Matrix sigmoid(const Matrix& z);

}  // namespace persona
