#include "persona/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "persona/errors.hpp"
#include "persona/optimizer.hpp"

namespace persona {

namespace {

constexpr std::uint64_t kStreamSalt = 0x9E3779B97F4A7C15ULL;

PropagationPlan make_plan(const ModelParams& params, const PersonaGraph* graph,
                          std::vector<NodeIndex> rows) {
  if (params.lambda == 0.0) return PropagationPlan::rows_only(std::move(rows));
  if (graph == nullptr) throw std::invalid_argument("graph-based model requires a graph");
  return PropagationPlan::for_rows(*graph, std::move(rows), params.gnn_layers.size());
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Gnn: return "gnn";
    case ModelKind::Fused: return "fused";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto kind : {ModelKind::Linear, ModelKind::Gnn, ModelKind::Fused}) {
    if (model_kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

bool uses_graph(ModelKind kind) { return kind != ModelKind::Linear; }

TrainConfig default_train_config(ModelKind kind) {
  TrainConfig c;
  if (kind == ModelKind::Linear) c.epochs = 1000;
  return c;
}

void validate(const TrainConfig& c) {
  if (!(c.lr_head > 0.0) || !(c.lr_gnn > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (c.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (c.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  if (c.gnn_hidden < 1) throw std::invalid_argument("GNN hidden size must be >= 1");
}

ModelParams init_model(std::size_t input_dim, ModelKind kind, const TrainConfig& config) {
  ModelShape shape;
  shape.input_dim = input_dim;
  shape.gnn_hidden = config.gnn_hidden;
  shape.gnn_layers = config.gnn_layers;
  shape.head_hidden = config.head_hidden;
  shape.dropout_rate = config.dropout_rate;
  switch (kind) {
    case ModelKind::Linear: shape.lambda = 0.0; break;
    case ModelKind::Gnn: shape.lambda = 1.0; break;
    case ModelKind::Fused: shape.lambda = config.lambda; break;
  }
  return init_params(shape, config.seed);
}

LabelMatrix take_rows(const LabelMatrix& m, const std::vector<NodeIndex>& rows) {
  LabelMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Matrix predict_probabilities(const ModelParams& params, const Matrix& features,
                             const PersonaGraph* graph, std::vector<NodeIndex> rows) {
  if (rows.empty()) {
    rows.resize(static_cast<std::size_t>(features.rows()));
    std::iota(rows.begin(), rows.end(), NodeIndex{0});
  }
  const auto plan = make_plan(params, graph, std::move(rows));
  std::mt19937_64 unused(0);
  return sigmoid(forward(params, features, plan, false, unused).z);
}

TrainResult train_model(const TrainingData& data, ModelKind kind, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  validate(config);
  if (data.features == nullptr || data.labels == nullptr) {
    throw std::invalid_argument("training data needs features and labels");
  }
  const Matrix& x = *data.features;
  const LabelMatrix& y = *data.labels;
  if (y.rows() != x.rows() || y.cols() != static_cast<Eigen::Index>(kLabelCount)) {
    throw std::invalid_argument("label matrix must be n x 5 with one row per feature row");
  }
  if (data.train_rows.empty()) throw std::invalid_argument("no training rows");
  if (data.eval_rows.empty()) throw std::invalid_argument("no evaluation rows");
  const PersonaGraph* graph = uses_graph(kind) ? data.graph : nullptr;
  if (uses_graph(kind)) {
    if (graph == nullptr) throw std::invalid_argument("this model kind requires a graph");
    if (graph->node_count() != static_cast<std::size_t>(x.rows())) {
      throw std::invalid_argument("graph node count does not match feature rows");
    }
  }
  for (const auto* rows : {&data.train_rows, &data.eval_rows}) {
    for (NodeIndex r : *rows) {
      if (r >= static_cast<NodeIndex>(x.rows())) throw std::invalid_argument("row out of range");
    }
  }

  ModelParams params = init_model(static_cast<std::size_t>(x.cols()), kind, config);
  AdamState adam = make_adam_state(params);
  std::mt19937_64 rng(config.seed ^ kStreamSalt);

  const auto eval_plan = make_plan(params, graph, data.eval_rows);
  const LabelMatrix eval_y = take_rows(y, eval_plan.output_rows());

  TrainResult result;
  result.best_f1 = -1.0;
  std::vector<NodeIndex> order = data.train_rows;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<NodeIndex> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(stop));
      const auto plan = make_plan(params, graph, std::move(batch));
      ForwardCache cache;
      try {
        cache = forward(params, x, plan, true, rng);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " +
                             e.what());
      }
      const LabelMatrix targets = take_rows(y, plan.output_rows());
      const double loss = bce_with_logits(cache.z, targets);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss;
      ++batches;
      adam_step(params, backward(params, cache, targets), adam, config.lr_head, config.lr_gnn);
    }

    std::mt19937_64 unused(0);
    const Matrix probs = sigmoid(forward(params, x, eval_plan, false, unused).z);
    const auto choice = threshold_sweep(probs, eval_y);
    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), choice.f1, choice.threshold};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (choice.f1 > result.best_f1) {
      result.best_f1 = choice.f1;
      result.best_threshold = choice.threshold;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

}  // namespace persona
