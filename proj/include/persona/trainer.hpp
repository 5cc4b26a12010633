#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "persona/graph.hpp"
#include "persona/metrics.hpp"
#include "persona/model.hpp"

namespace persona {

// linear: feature branch only (lambda = 0, graph unused)
// gnn:    graph branch only (lambda = 1)
// fused:  both branches mixed with TrainConfig::lambda
enum class ModelKind { Linear, Gnn, Fused };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);
bool uses_graph(ModelKind kind);

struct TrainConfig {
  double lr_head = 2e-4;
  double lr_gnn = 2e-3;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double dropout_rate = 0.1;
  double lambda = 0.7;
  std::size_t gnn_hidden = 64;
  std::size_t gnn_layers = 2;
  std::size_t head_hidden = 0;  // 0 means feature dim
  std::uint64_t seed = 0;
};

// Frozen-feature linear baselines train for 1000 epochs; everything else 20.
TrainConfig default_train_config(ModelKind kind);

// Throws std::invalid_argument.
void validate(const TrainConfig& config);

struct TrainingData {
  const Matrix* features = nullptr;
  const PersonaGraph* graph = nullptr;  // required unless the kind is Linear
  const LabelMatrix* labels = nullptr;  // one row per node
  std::vector<NodeIndex> train_rows;    // contribute to the loss
  std::vector<NodeIndex> eval_rows;     // drive best-epoch selection
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean over the epoch's batches
  double eval_f1 = 0.0;
  double threshold = 0.5;
};

struct TrainResult {
  ModelParams params;  // snapshot with the best eval F1
  std::size_t best_epoch = 0;
  double best_f1 = 0.0;
  double best_threshold = 0.5;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batches of train rows (shuffled each epoch) define the loss of each
// Adam step; each step evaluates the model exactly on the batch's receptive
// field. Throws NumericalError on a non-finite loss.
TrainResult train_model(const TrainingData& data, ModelKind kind, const TrainConfig& config,
                        const EpochCallback& on_epoch = {});

ModelParams init_model(std::size_t input_dim, ModelKind kind, const TrainConfig& config);

// sigmoid(fused logits) in evaluation mode for the given rows (all rows when
// empty). graph may be null when params.lambda == 0.
Matrix predict_probabilities(const ModelParams& params, const Matrix& features,
                             const PersonaGraph* graph, std::vector<NodeIndex> rows = {});

LabelMatrix take_rows(const LabelMatrix& m, const std::vector<NodeIndex>& rows);

}  // namespace persona
