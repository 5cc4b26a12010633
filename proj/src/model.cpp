#include "persona/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "persona/errors.hpp"

namespace persona {

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Dense dense_layer(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return {glorot(in, out, rng), RowVector::Zero(static_cast<Eigen::Index>(out))};
}

Matrix gather_rows(const Matrix& src, std::span<const NodeIndex> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Matrix gather_positions(const Matrix& src, const std::vector<Eigen::Index>& positions) {
  Matrix out(static_cast<Eigen::Index>(positions.size()), src.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = src.row(positions[i]);
  }
  return out;
}

Matrix affine(const Matrix& x, const Dense& layer) {
  Matrix y = x * layer.weight;
  y.rowwise() += layer.bias;
  return y;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

void check_layer_dims(const ModelParams& params, std::size_t input_dim) {
  std::size_t d = input_dim;
  for (std::size_t l = 0; l < params.gnn_layers.size(); ++l) {
    const auto& layer = params.gnn_layers[l];
    if (static_cast<std::size_t>(layer.w_self.rows()) != d ||
        static_cast<std::size_t>(layer.w_neigh.rows()) != d ||
        layer.w_self.cols() != layer.w_neigh.cols() || layer.bias.size() != layer.w_self.cols()) {
      throw std::invalid_argument("SAGE layer " + std::to_string(l) +
                                  " has inconsistent dimensions (expected input dim " +
                                  std::to_string(d) + ")");
    }
    d = static_cast<std::size_t>(layer.w_self.cols());
  }
  if (static_cast<std::size_t>(params.gnn_projection.weight.rows()) != d ||
      params.gnn_projection.weight.cols() != static_cast<Eigen::Index>(kLabelCount)) {
    throw std::invalid_argument("GNN projection must map " + std::to_string(d) + " -> " +
                                std::to_string(kLabelCount));
  }
}

void check_head_dims(const ClassifierHead& head, std::size_t input_dim) {
  if (static_cast<std::size_t>(head.dense.weight.rows()) != input_dim) {
    throw std::invalid_argument("head dense layer expects input dim " +
                                std::to_string(head.dense.weight.rows()) + ", got " +
                                std::to_string(input_dim));
  }
  if (head.projection.weight.rows() != head.dense.weight.cols() ||
      head.projection.weight.cols() != static_cast<Eigen::Index>(kLabelCount)) {
    throw std::invalid_argument("head projection must map dense output to " +
                                std::to_string(kLabelCount) + " logits");
  }
  if (!(head.dropout_rate >= 0.0 && head.dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
}

SparseMatrix build_aggregation(const PersonaGraph& graph, const std::vector<NodeIndex>& out_rows,
                               const std::vector<Eigen::Index>& position_in_input,
                               Eigen::Index input_rows) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < out_rows.size(); ++i) {
    const auto& adj = graph.neighbors(out_rows[i]);
    double total = 0.0;
    for (const auto& a : adj) total += a.weight;
    if (total <= 0.0) continue;
    for (const auto& a : adj) {
      if (a.weight == 0.0) continue;
      triplets.emplace_back(static_cast<Eigen::Index>(i), position_in_input[a.node],
                            a.weight / total);
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(out_rows.size()), input_rows);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  if (shape.input_dim == 0) throw std::invalid_argument("input_dim must be positive");
  if (shape.gnn_hidden == 0) throw std::invalid_argument("gnn_hidden must be positive");
  if (!(shape.lambda >= 0.0 && shape.lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  if (!(shape.dropout_rate >= 0.0 && shape.dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.lambda = shape.lambda;
  std::size_t d = shape.input_dim;
  for (std::size_t l = 0; l < shape.gnn_layers; ++l) {
    SageLayer layer;
    layer.w_self = glorot(d, shape.gnn_hidden, rng);
    layer.w_neigh = glorot(d, shape.gnn_hidden, rng);
    layer.bias = RowVector::Zero(static_cast<Eigen::Index>(shape.gnn_hidden));
    p.gnn_layers.push_back(std::move(layer));
    d = shape.gnn_hidden;
  }
  p.gnn_projection = dense_layer(d, kLabelCount, rng);
  const std::size_t head_hidden = shape.head_hidden == 0 ? shape.input_dim : shape.head_hidden;
  p.head.dense = dense_layer(shape.input_dim, head_hidden, rng);
  p.head.projection = dense_layer(head_hidden, kLabelCount, rng);
  p.head.dropout_rate = shape.dropout_rate;
  return p;
}

Gradients zeros_like(const ModelParams& params) {
  Gradients g = params;
  for_each_tensor(g, [](ParamGroup, std::string_view, std::span<double> t) {
    std::fill(t.begin(), t.end(), 0.0);
  });
  return g;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for_each_tensor(params,
                  [&](ParamGroup, std::string_view, std::span<const double> t) { n += t.size(); });
  return n;
}

PropagationPlan PropagationPlan::full(const PersonaGraph& graph, std::size_t depth) {
  std::vector<NodeIndex> all(graph.node_count());
  for (NodeIndex i = 0; i < all.size(); ++i) all[i] = i;
  return for_rows(graph, std::move(all), depth);
}

PropagationPlan PropagationPlan::for_rows(const PersonaGraph& graph,
                                          std::vector<NodeIndex> output_rows, std::size_t depth) {
  std::sort(output_rows.begin(), output_rows.end());
  output_rows.erase(std::unique(output_rows.begin(), output_rows.end()), output_rows.end());
  const std::size_t n = graph.node_count();
  if (!output_rows.empty() && output_rows.back() >= n) {
    throw std::invalid_argument("plan row index out of range");
  }

  PropagationPlan plan;
  plan.rows_.assign(depth + 1, {});
  plan.rows_[depth] = std::move(output_rows);
  std::vector<char> marked(n, 0);
  for (std::size_t level = depth; level > 0; --level) {
    std::fill(marked.begin(), marked.end(), 0);
    for (NodeIndex v : plan.rows_[level]) {
      marked[v] = 1;
      for (const auto& a : graph.neighbors(v)) marked[a.node] = 1;
    }
    auto& below = plan.rows_[level - 1];
    for (NodeIndex v = 0; v < n; ++v) {
      if (marked[v]) below.push_back(v);
    }
  }

  plan.aggregation_.resize(depth);
  plan.self_positions_.resize(depth);
  std::vector<Eigen::Index> position(n, -1);
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& in_rows = plan.rows_[l];
    for (std::size_t i = 0; i < in_rows.size(); ++i) {
      position[in_rows[i]] = static_cast<Eigen::Index>(i);
    }
    const auto& out_rows = plan.rows_[l + 1];
    auto& self = plan.self_positions_[l];
    self.reserve(out_rows.size());
    for (NodeIndex v : out_rows) self.push_back(position[v]);
    plan.aggregation_[l] =
        build_aggregation(graph, out_rows, position, static_cast<Eigen::Index>(in_rows.size()));
  }
  return plan;
}

PropagationPlan PropagationPlan::rows_only(std::vector<NodeIndex> output_rows) {
  std::sort(output_rows.begin(), output_rows.end());
  output_rows.erase(std::unique(output_rows.begin(), output_rows.end()), output_rows.end());
  PropagationPlan plan;
  plan.rows_.push_back(std::move(output_rows));
  return plan;
}

ForwardCache forward(const ModelParams& params, const Matrix& features,
                     const PropagationPlan& plan, bool training, std::mt19937_64& rng) {
  if (!(params.lambda >= 0.0 && params.lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  if (!plan.output_rows().empty() &&
      plan.rows(0).back() >= static_cast<NodeIndex>(features.rows())) {
    throw std::invalid_argument("plan refers to rows beyond the feature matrix");
  }
  const auto input_dim = static_cast<std::size_t>(features.cols());

  ForwardCache cache;
  cache.plan = &plan;
  cache.lambda = params.lambda;
  cache.has_gnn = params.lambda > 0.0;
  cache.has_head = params.lambda < 1.0;
  const auto n_out = static_cast<Eigen::Index>(plan.output_rows().size());

  if (cache.has_gnn) {
    check_layer_dims(params, input_dim);
    const std::size_t depth = params.gnn_layers.size();
    if (plan.depth() != depth) {
      throw std::invalid_argument("propagation plan depth " + std::to_string(plan.depth()) +
                                  " does not match " + std::to_string(depth) + " SAGE layers");
    }
    cache.hidden.reserve(depth + 1);
    cache.hidden.push_back(gather_rows(features, plan.rows(0)));
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& layer = params.gnn_layers[l];
      const Matrix& h = cache.hidden[l];
      cache.aggregated.push_back(plan.aggregation(l) * h);
      Matrix pre = gather_positions(h, plan.self_positions(l)) * layer.w_self +
                   cache.aggregated.back() * layer.w_neigh;
      pre.rowwise() += layer.bias;
      require_finite(pre, "SAGE layer pre-activation");
      cache.hidden.push_back(relu(pre));
      cache.pre_activation.push_back(std::move(pre));
    }
    cache.z_gnn = affine(cache.hidden.back(), params.gnn_projection);
    require_finite(cache.z_gnn, "GNN logits");
  }

  if (cache.has_head) {
    check_head_dims(params.head, input_dim);
    cache.head_input = gather_rows(features, plan.output_rows());
    cache.head_pre_activation = affine(cache.head_input, params.head.dense);
    cache.head_hidden = relu(cache.head_pre_activation);
    const double p = params.head.dropout_rate;
    if (training && p > 0.0) {
      std::bernoulli_distribution keep(1.0 - p);
      const double scale = 1.0 / (1.0 - p);
      cache.dropout_mask.resize(cache.head_hidden.rows(), cache.head_hidden.cols());
      for (Eigen::Index i = 0; i < cache.dropout_mask.size(); ++i) {
        cache.dropout_mask.data()[i] = keep(rng) ? scale : 0.0;
      }
      cache.head_hidden.array() *= cache.dropout_mask.array();
    }
    cache.z_encoder = affine(cache.head_hidden, params.head.projection);
    require_finite(cache.z_encoder, "head logits");
  }

  if (cache.has_gnn && cache.has_head) {
    cache.z = combined_logits(cache.z_gnn, cache.z_encoder, params.lambda);
  } else if (cache.has_gnn) {
    cache.z = cache.z_gnn;
  } else {
    cache.z = cache.z_encoder;
  }
  if (cache.z.rows() != n_out) throw std::logic_error("forward produced a wrong row count");
  return cache;
}

Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const LabelMatrix& targets) {
  if (cache.plan == nullptr || cache.z.size() == 0) {
    throw std::invalid_argument("backward requires a completed forward pass");
  }
  if (targets.rows() != cache.z.rows() || targets.cols() != cache.z.cols()) {
    throw std::invalid_argument("targets do not match the logits shape");
  }
  Gradients grads = zeros_like(params);
  const auto count = static_cast<double>(cache.z.size());
  const Matrix dz = (sigmoid(cache.z) - targets) / count;

  if (cache.has_gnn) {
    const PropagationPlan& plan = *cache.plan;
    const Matrix dz_gnn = cache.lambda * dz;
    grads.gnn_projection.weight = cache.hidden.back().transpose() * dz_gnn;
    grads.gnn_projection.bias = dz_gnn.colwise().sum();
    Matrix dh = dz_gnn * params.gnn_projection.weight.transpose();
    for (std::size_t l = params.gnn_layers.size(); l-- > 0;) {
      const auto& layer = params.gnn_layers[l];
      auto& g = grads.gnn_layers[l];
      const Matrix dpre = dh.cwiseProduct(relu_mask(cache.pre_activation[l]));
      const Matrix self = gather_positions(cache.hidden[l], plan.self_positions(l));
      g.w_self = self.transpose() * dpre;
      g.w_neigh = cache.aggregated[l].transpose() * dpre;
      g.bias = dpre.colwise().sum();
      if (l == 0) break;
      Matrix below = plan.aggregation(l).transpose() * (dpre * layer.w_neigh.transpose());
      const Matrix dself = dpre * layer.w_self.transpose();
      const auto& pos = plan.self_positions(l);
      for (std::size_t i = 0; i < pos.size(); ++i) {
        below.row(pos[i]) += dself.row(static_cast<Eigen::Index>(i));
      }
      dh = std::move(below);
    }
  }

  if (cache.has_head) {
    const Matrix dz_enc = (1.0 - cache.lambda) * dz;
    const auto& head = params.head;
    grads.head.projection.weight = cache.head_hidden.transpose() * dz_enc;
    grads.head.projection.bias = dz_enc.colwise().sum();
    Matrix dhidden = dz_enc * head.projection.weight.transpose();
    if (cache.dropout_mask.size() != 0) dhidden.array() *= cache.dropout_mask.array();
    const Matrix dpre = dhidden.cwiseProduct(relu_mask(cache.head_pre_activation));
    grads.head.dense.weight = cache.head_input.transpose() * dpre;
    grads.head.dense.bias = dpre.colwise().sum();
  }
  return grads;
}

Matrix sage_forward(const Matrix& features, const PersonaGraph& graph,
                    std::span<const SageLayer> layers, const Dense& projection) {
  if (static_cast<std::size_t>(features.rows()) != graph.node_count()) {
    throw std::invalid_argument("feature rows do not match graph nodes");
  }
  ModelParams p;
  p.gnn_layers.assign(layers.begin(), layers.end());
  p.gnn_projection = projection;
  p.lambda = 1.0;
  const auto plan = PropagationPlan::full(graph, layers.size());
  std::mt19937_64 unused(0);
  return forward(p, features, plan, false, unused).z_gnn;
}

Matrix head_forward(const Matrix& features, const ClassifierHead& head, bool training,
                    std::mt19937_64& rng) {
  ModelParams p;
  p.head = head;
  p.lambda = 0.0;
  std::vector<NodeIndex> rows(static_cast<std::size_t>(features.rows()));
  for (NodeIndex i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto plan = PropagationPlan::rows_only(std::move(rows));
  return forward(p, features, plan, training, rng).z_encoder;
}

Matrix combined_logits(const Matrix& z_gnn, const Matrix& z_encoder, double lambda) {
  if (z_gnn.rows() != z_encoder.rows() || z_gnn.cols() != z_encoder.cols()) {
    throw std::invalid_argument("combined_logits: shape mismatch");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("combined_logits: lambda must lie in [0, 1]");
  }
  if (lambda == 0.0) return z_encoder;
  if (lambda == 1.0) return z_gnn;
  return lambda * z_gnn + (1.0 - lambda) * z_encoder;
}

double bce_with_logits(const Matrix& z, const LabelMatrix& y) {
  if (z.rows() != y.rows() || z.cols() != y.cols()) {
    throw std::invalid_argument("bce_with_logits: shape mismatch");
  }
  if (!z.allFinite()) throw NumericalError("bce_with_logits: non-finite logits");
  if (z.size() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zi = z.data()[i];
    total += std::max(zi, 0.0) - zi * y.data()[i] + std::log1p(std::exp(-std::abs(zi)));
  }
  return total / static_cast<double>(z.size());
}

Matrix sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

}  // namespace persona
