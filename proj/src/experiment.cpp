#include "persona/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "persona/corpus.hpp"

namespace persona {

namespace {

constexpr std::uint64_t kValidationSalt = 0xA24BAED4963EE407ULL;

std::vector<NodeIndex> pick(const std::vector<NodeIndex>& rows, const std::vector<NodeIndex>& at) {
  std::vector<NodeIndex> out;
  out.reserve(at.size());
  for (auto i : at) out.push_back(rows[i]);
  return out;
}

const FeatureSource& find_features(const ExperimentSetup& setup, const std::string& name) {
  for (const auto& f : setup.features) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown feature source \"" + name + "\"");
}

std::string format_fraction(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", fraction * 100.0);
  return buf;
}

nlohmann::ordered_json summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  return j;
}

Summary summary_from_json(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

std::string Variant::tag() const { return feature + "&" + std::string(model_kind_name(kind)); }

void validate(const ExperimentConfig& c) {
  if (c.fractions.empty()) throw std::invalid_argument("at least one fraction is required");
  for (double f : c.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("fractions must lie in (0, 1]");
  }
  if (c.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (c.kinds.empty()) throw std::invalid_argument("at least one model kind is required");
  if (c.linear_epochs < 1) throw std::invalid_argument("linear epochs must be >= 1");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  }
  validate(c.train);
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / n);
  return s;
}

const CellSummary& ExperimentReport::cell(const std::string& variant, double fraction) const {
  for (const auto& c : cells) {
    if (c.variant == variant && c.fraction == fraction) return c;
  }
  throw std::out_of_range("no cell for " + variant + " at fraction " + std::to_string(fraction));
}

std::vector<Variant> experiment_variants(const ExperimentSetup& setup,
                                         const ExperimentConfig& config) {
  std::vector<Variant> out;
  for (const auto& f : setup.features) {
    for (auto kind : config.kinds) out.push_back({f.name, kind});
  }
  return out;
}

TrainConfig cell_train_config(const ExperimentConfig& config, ModelKind kind,
                              std::uint64_t run_seed) {
  TrainConfig c = config.train;
  c.seed = run_seed;
  if (kind == ModelKind::Linear) c.epochs = config.linear_epochs;
  return c;
}

MetricsRecord run_cell(const ExperimentSetup& setup, const ExperimentConfig& config,
                       const Variant& variant, double fraction, std::size_t run) {
  const std::uint64_t run_seed = config.base_seed + run;
  const auto& features = find_features(setup, variant.feature);
  auto train_rows = pick(setup.train_rows, subsample_indices(setup.train_rows.size(), fraction,
                                                             run_seed));
  std::sort(train_rows.begin(), train_rows.end());
  std::vector<NodeIndex> test_rows = setup.test_rows;
  std::sort(test_rows.begin(), test_rows.end());

  std::vector<NodeIndex> eval_rows = test_rows;
  const bool held_out = config.validation_fraction > 0.0;
  if (held_out) {
    if (train_rows.size() < 2) {
      throw std::invalid_argument("validation split needs at least 2 sampled train rows");
    }
    auto val_at = subsample_indices(train_rows.size(), config.validation_fraction,
                                    run_seed ^ kValidationSalt);
    if (val_at.size() == train_rows.size()) val_at.pop_back();
    eval_rows = pick(train_rows, val_at);
    std::vector<NodeIndex> rest;
    std::set_difference(train_rows.begin(), train_rows.end(), eval_rows.begin(), eval_rows.end(),
                        std::back_inserter(rest));
    train_rows = std::move(rest);
  }

  TrainingData data;
  data.features = &features.values;
  data.graph = setup.graph;
  data.labels = &setup.labels;
  data.train_rows = train_rows;
  data.eval_rows = eval_rows;
  const auto result = train_model(data, variant.kind,
                                  cell_train_config(config, variant.kind, run_seed));

  const Matrix probs = predict_probabilities(result.params, features.values,
                                             uses_graph(variant.kind) ? setup.graph : nullptr,
                                             test_rows);
  const LabelMatrix y = take_rows(setup.labels, test_rows);

  MetricsRecord rec;
  rec.variant = variant.tag();
  rec.fraction = fraction;
  rec.run = run;
  rec.run_seed = run_seed;
  rec.train_size = train_rows.size();
  rec.best_epoch = result.best_epoch;
  rec.threshold = held_out ? result.best_threshold : threshold_sweep(probs, y).threshold;
  if (config.per_label_thresholds) {
    const Matrix* sweep_probs = &probs;
    const LabelMatrix* sweep_y = &y;
    Matrix val_probs;
    LabelMatrix val_y;
    if (held_out) {
      val_probs = predict_probabilities(result.params, features.values,
                                        uses_graph(variant.kind) ? setup.graph : nullptr,
                                        eval_rows);
      val_y = take_rows(setup.labels, eval_rows);
      sweep_probs = &val_probs;
      sweep_y = &val_y;
    }
    std::array<double, kLabelCount> thresholds;
    const auto choices = threshold_sweep_per_label(*sweep_probs, *sweep_y);
    for (std::size_t j = 0; j < kLabelCount; ++j) thresholds[j] = choices[j].threshold;
    rec.label_thresholds.assign(thresholds.begin(), thresholds.end());
    rec.metrics = multilabel_metrics(probs, y, thresholds);
  } else {
    rec.metrics = multilabel_metrics(probs, y, rec.threshold);
  }
  return rec;
}

std::vector<CellSummary> aggregate(const std::vector<MetricsRecord>& records) {
  std::vector<CellSummary> cells;
  std::vector<std::vector<const MetricsRecord*>> members;
  for (const auto& r : records) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const CellSummary& c) {
      return c.variant == r.variant && c.fraction == r.fraction;
    });
    if (it == cells.end()) {
      cells.push_back({r.variant, r.fraction, 0, {}, {}, {}, {}, {}});
      members.emplace_back();
      it = cells.end() - 1;
    }
    members[static_cast<std::size_t>(it - cells.begin())].push_back(&r);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::vector<double> f1, p, r, mf1, t;
    for (const auto* rec : members[i]) {
      f1.push_back(rec->metrics.f1);
      p.push_back(rec->metrics.precision);
      r.push_back(rec->metrics.recall);
      mf1.push_back(rec->metrics.macro_f1);
      t.push_back(rec->threshold);
    }
    cells[i].runs = members[i].size();
    cells[i].f1 = summarize(f1);
    cells[i].precision = summarize(p);
    cells[i].recall = summarize(r);
    cells[i].macro_f1 = summarize(mf1);
    cells[i].threshold = summarize(t);
  }
  return cells;
}

ExperimentReport run_experiment(const ExperimentSetup& setup, const ExperimentConfig& config) {
  validate(config);
  if (setup.features.empty()) throw std::invalid_argument("no feature sources");
  if (setup.train_rows.empty() || setup.test_rows.empty()) {
    throw std::invalid_argument("experiment needs train and test rows");
  }
  const auto variants = experiment_variants(setup, config);
  for (const auto& v : variants) {
    if (uses_graph(v.kind) && setup.graph == nullptr) {
      throw std::invalid_argument("variant " + v.tag() + " needs a graph");
    }
  }

  struct Job {
    const Variant* variant;
    double fraction;
    std::size_t run;
  };
  std::vector<Job> jobs;
  for (double fraction : config.fractions) {
    for (const auto& v : variants) {
      for (std::size_t run = 0; run < config.runs; ++run) jobs.push_back({&v, fraction, run});
    }
  }

  std::vector<MetricsRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        records[i] = run_cell(setup, config, *jobs[i].variant, jobs[i].fraction, jobs[i].run);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(config.jobs, 1, jobs.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  report.records = std::move(records);
  report.cells = aggregate(report.records);
  return report;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report,
                                      const ExperimentConfig& config) {
  nlohmann::ordered_json doc;
  auto& cfg = doc["config"];
  cfg["fractions"] = config.fractions;
  cfg["runs"] = config.runs;
  cfg["base_seed"] = config.base_seed;
  auto kinds = nlohmann::ordered_json::array();
  for (auto k : config.kinds) kinds.push_back(std::string(model_kind_name(k)));
  cfg["kinds"] = std::move(kinds);
  cfg["lr_head"] = config.train.lr_head;
  cfg["lr_gnn"] = config.train.lr_gnn;
  cfg["epochs"] = config.train.epochs;
  cfg["linear_epochs"] = config.linear_epochs;
  cfg["batch_size"] = config.train.batch_size;
  cfg["dropout_rate"] = config.train.dropout_rate;
  cfg["lambda"] = config.train.lambda;
  cfg["gnn_hidden"] = config.train.gnn_hidden;
  cfg["gnn_layers"] = config.train.gnn_layers;
  cfg["head_hidden"] = config.train.head_hidden;
  cfg["validation_fraction"] = config.validation_fraction;
  cfg["per_label_thresholds"] = config.per_label_thresholds;

  auto records = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    nlohmann::ordered_json j;
    j["variant"] = r.variant;
    j["fraction"] = r.fraction;
    j["run"] = r.run;
    j["run_seed"] = r.run_seed;
    j["train_size"] = r.train_size;
    j["best_epoch"] = r.best_epoch;
    j["threshold"] = r.threshold;
    if (!r.label_thresholds.empty()) j["label_thresholds"] = r.label_thresholds;
    j["f1"] = r.metrics.f1;
    j["precision"] = r.metrics.precision;
    j["recall"] = r.metrics.recall;
    j["macro_f1"] = r.metrics.macro_f1;
    j["macro_precision"] = r.metrics.macro_precision;
    j["macro_recall"] = r.metrics.macro_recall;
    records.push_back(std::move(j));
  }
  doc["records"] = std::move(records);

  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    nlohmann::ordered_json j;
    j["variant"] = c.variant;
    j["fraction"] = c.fraction;
    j["runs"] = c.runs;
    j["f1"] = summary_json(c.f1);
    j["precision"] = summary_json(c.precision);
    j["recall"] = summary_json(c.recall);
    j["macro_f1"] = summary_json(c.macro_f1);
    j["threshold"] = summary_json(c.threshold);
    cells.push_back(std::move(j));
  }
  doc["cells"] = std::move(cells);
  return doc;
}

ExperimentReport report_from_json(const nlohmann::json& doc) {
  ExperimentReport report;
  for (const auto& j : doc.at("records")) {
    MetricsRecord r;
    r.variant = j.at("variant").get<std::string>();
    r.fraction = j.at("fraction").get<double>();
    r.run = j.at("run").get<std::size_t>();
    r.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.train_size = j.at("train_size").get<std::size_t>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.threshold = j.at("threshold").get<double>();
    if (j.contains("label_thresholds")) {
      r.label_thresholds = j["label_thresholds"].get<std::vector<double>>();
    }
    r.metrics.f1 = j.at("f1").get<double>();
    r.metrics.precision = j.at("precision").get<double>();
    r.metrics.recall = j.at("recall").get<double>();
    r.metrics.macro_f1 = j.at("macro_f1").get<double>();
    r.metrics.macro_precision = j.at("macro_precision").get<double>();
    r.metrics.macro_recall = j.at("macro_recall").get<double>();
    report.records.push_back(std::move(r));
  }
  for (const auto& j : doc.at("cells")) {
    CellSummary c;
    c.variant = j.at("variant").get<std::string>();
    c.fraction = j.at("fraction").get<double>();
    c.runs = j.at("runs").get<std::size_t>();
    c.f1 = summary_from_json(j.at("f1"));
    c.precision = summary_from_json(j.at("precision"));
    c.recall = summary_from_json(j.at("recall"));
    c.macro_f1 = summary_from_json(j.at("macro_f1"));
    c.threshold = summary_from_json(j.at("threshold"));
    report.cells.push_back(std::move(c));
  }
  return report;
}

std::string render_table(const ExperimentReport& report) {
  std::vector<double> fractions;
  for (const auto& c : report.cells) {
    if (std::find(fractions.begin(), fractions.end(), c.fraction) == fractions.end()) {
      fractions.push_back(c.fraction);
    }
  }
  std::size_t width = 7;
  for (const auto& c : report.cells) width = std::max(width, c.variant.size());

  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-8s  %-*s  %-6s  %-6s  %-9s  %-6s  %-6s  %-6s  %-8s\n",
                "% train", static_cast<int>(width), "variant", "F1", "std", "Precision", "std",
                "Recall", "std", "Macro-F1");
  out << line;
  const std::string rule(8 + 2 + width + 2 + 6 + 2 + 6 + 2 + 9 + 2 + 6 + 2 + 6 + 2 + 6 + 2 + 8,
                         '-');
  out << rule << '\n';
  for (double fraction : fractions) {
    std::vector<const CellSummary*> group;
    for (const auto& c : report.cells) {
      if (c.fraction == fraction) group.push_back(&c);
    }
    std::stable_sort(group.begin(), group.end(), [](const CellSummary* a, const CellSummary* b) {
      return a->f1.mean > b->f1.mean;
    });
    bool first = true;
    for (const auto* c : group) {
      std::snprintf(line, sizeof(line),
                    "%-8s  %-*s  %.4f  %.4f  %.4f     %.4f  %.4f  %.4f  %.4f\n",
                    first ? format_fraction(fraction).c_str() : "", static_cast<int>(width),
                    c->variant.c_str(), c->f1.mean, c->f1.std, c->precision.mean,
                    c->precision.std, c->recall.mean, c->recall.std, c->macro_f1.mean);
      out << line;
      first = false;
    }
    out << rule << '\n';
  }
  return out.str();
}

}  // namespace persona
