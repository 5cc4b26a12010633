#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona/metrics.hpp"
#include "persona/trainer.hpp"

namespace persona {

struct FeatureSource {
  std::string name;  // e.g. "emb", "tfidf", "bow"
  Matrix values;     // one row per node
};

struct Variant {
  std::string feature;
  ModelKind kind = ModelKind::Linear;

  std::string tag() const;  // "<feature>&<kind>"
};

struct ExperimentSetup {
  std::vector<FeatureSource> features;
  const PersonaGraph* graph = nullptr;
  LabelMatrix labels;  // one row per node
  std::vector<NodeIndex> train_rows;
  std::vector<NodeIndex> test_rows;  // never subsampled
};

struct ExperimentConfig {
  std::vector<double> fractions = {1.0};
  std::size_t runs = 10;
  std::uint64_t base_seed = 0;
  std::vector<ModelKind> kinds = {ModelKind::Linear, ModelKind::Fused};
  TrainConfig train;                  // graph-based kinds
  std::size_t linear_epochs = 1000;   // overrides train.epochs for ModelKind::Linear
  // > 0: carve this share of the sampled train rows out for best-epoch
  // selection instead of selecting on the test rows.
  double validation_fraction = 0.0;
  bool per_label_thresholds = false;
  std::size_t jobs = 1;
};

// Throws std::invalid_argument.
void validate(const ExperimentConfig& config);

struct MetricsRecord {
  std::string variant;
  double fraction = 1.0;
  std::size_t run = 0;
  std::uint64_t run_seed = 0;
  std::size_t train_size = 0;
  std::size_t best_epoch = 0;
  double threshold = 0.5;
  std::vector<double> label_thresholds;  // only with per-label thresholds
  Metrics metrics;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over runs
};

Summary summarize(const std::vector<double>& values);

struct CellSummary {
  std::string variant;
  double fraction = 1.0;
  std::size_t runs = 0;
  Summary f1, precision, recall, macro_f1, threshold;
};

struct ExperimentReport {
  std::vector<MetricsRecord> records;  // ordered by fraction, variant, run
  std::vector<CellSummary> cells;      // ordered by fraction, variant

  const CellSummary& cell(const std::string& variant, double fraction) const;
};

std::vector<Variant> experiment_variants(const ExperimentSetup& setup,
                                         const ExperimentConfig& config);

TrainConfig cell_train_config(const ExperimentConfig& config, ModelKind kind,
                              std::uint64_t run_seed);

// One (variant, fraction, run) cell: subsample train rows with seed
// base_seed + run, train, sweep the threshold on the test rows, score them.
MetricsRecord run_cell(const ExperimentSetup& setup, const ExperimentConfig& config,
                       const Variant& variant, double fraction, std::size_t run);

ExperimentReport run_experiment(const ExperimentSetup& setup, const ExperimentConfig& config);

// Recomputes every cell from the raw records.
std::vector<CellSummary> aggregate(const std::vector<MetricsRecord>& records);

nlohmann::ordered_json report_to_json(const ExperimentReport& report,
                                      const ExperimentConfig& config);
ExperimentReport report_from_json(const nlohmann::json& doc);

// Aligned text table, grouped by fraction, variants sorted by mean F1.
std::string render_table(const ExperimentReport& report);

}  // namespace persona
