#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "persona/checkpoint.hpp"
#include "persona/corpus.hpp"
#include "persona/errors.hpp"
#include "persona/experiment.hpp"
#include "persona/features.hpp"
#include "persona/graph.hpp"
#include "persona/synthetic.hpp"
#include "persona/trainer.hpp"

namespace persona::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StatsOptions {
  std::string corpus;
};

struct GraphCommandOptions {
  std::string corpus;
  std::string test_corpus;
  std::string embeddings;
  std::string scores;
  std::string scorer = "cosine";
  std::size_t k = 7;
  bool train_only = false;
  std::string out;
};

struct TrainOptions {
  std::string corpus;
  std::string test_corpus;
  std::string embeddings;
  std::string features = "embeddings";
  std::size_t min_df = 1;
  std::string graph;
  std::size_t k = 7;
  std::string variant = "fused";
  double lambda = 0.7;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double lr_head = 2e-4;
  double lr_gnn = 2e-3;
  double dropout = 0.1;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t head_hidden = 0;
  double validation_fraction = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct ExperimentOptions {
  std::string corpus;
  std::string test_corpus;
  std::string embeddings;
  std::vector<std::string> features = {"embeddings"};
  std::size_t min_df = 1;
  std::string graph;
  std::size_t k = 7;
  std::vector<std::string> variants = {"linear", "fused"};
  std::vector<double> fractions = {0.01, 0.3, 0.5, 0.7, 1.0};
  std::size_t runs = 10;
  double lambda = 0.7;
  std::size_t epochs = 20;
  std::size_t linear_epochs = 1000;
  std::size_t batch_size = 32;
  double lr_head = 2e-4;
  double lr_gnn = 2e-3;
  double dropout = 0.1;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t head_hidden = 0;
  double validation_fraction = 0.0;
  bool per_label_thresholds = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out;
};

struct SynthOptions {
  std::size_t n = 1000;
  std::size_t dim = 32;
  std::size_t clusters = 8;
  double noise = 0.1;
  double spread = SyntheticConfig{}.cluster_spread;
  double center_scale = SyntheticConfig{}.center_scale;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string out;
};

// Train records first, then test records.
struct NodeSet {
  Dataset train;
  Dataset test;
  Dataset nodes;
  std::vector<NodeIndex> train_rows;
  std::vector<NodeIndex> test_rows;
};

NodeSet load_nodes(const std::string& corpus, const std::string& test_corpus) {
  NodeSet s;
  s.train = load_jsonl(corpus, SplitTag::Train);
  if (s.train.empty()) throw DataError(corpus + ": corpus is empty");
  if (!test_corpus.empty()) {
    s.test = load_jsonl(test_corpus, SplitTag::Test);
    if (s.test.empty()) throw DataError(test_corpus + ": corpus is empty");
  }
  s.nodes = concat(s.train, s.test);
  for (NodeIndex i = 0; i < s.train.size(); ++i) s.train_rows.push_back(i);
  for (NodeIndex i = 0; i < s.test.size(); ++i) s.test_rows.push_back(s.train.size() + i);
  return s;
}

std::string feature_tag(const std::string& kind) {
  if (kind == "embeddings") return "emb";
  return kind;
}

FeatureSource make_features(const std::string& kind, const NodeSet& nodes,
                            const std::string& embeddings, std::size_t min_df) {
  FeatureSource src;
  src.name = feature_tag(kind);
  if (kind == "embeddings") {
    if (embeddings.empty()) throw UsageError("--features embeddings requires --embeddings");
    src.values = load_embeddings(embeddings, nodes.nodes).values;
  } else if (kind == "tfidf" || kind == "bow") {
    const auto vocab = fit_vocabulary(nodes.train, min_df);
    if (vocab.size() == 0) throw DataError("vocabulary is empty at this --min-df");
    src.values = (kind == "tfidf" ? tfidf_transform(nodes.nodes, vocab)
                                  : bow_transform(nodes.nodes, vocab))
                     .values;
  } else {
    throw UsageError("unknown feature source \"" + kind + "\"");
  }
  return src;
}

PersonaGraph resolve_graph(const std::string& graph_path, const NodeSet& nodes,
                           const std::string& embeddings, std::size_t k) {
  if (!graph_path.empty()) return load_graph(graph_path).aligned_to(nodes.nodes.ids());
  if (embeddings.empty()) {
    throw UsageError("graph-based variants need --graph or --embeddings to build one");
  }
  const auto features = load_embeddings(embeddings, nodes.nodes);
  const CosineScorer scorer(features.values);
  return build_graph(features, GraphOptions{k, {}}, scorer);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::vector<fs::path> existing(std::initializer_list<std::string> paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (!p.empty()) out.emplace_back(p);
  }
  return out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int cmd_stats(const StatsOptions& o, std::ostream& out) {
  const auto ds = load_jsonl(o.corpus);
  if (ds.empty()) throw DataError(o.corpus + ": corpus is empty");
  const auto stats = label_stats(ds);
  char line[128];
  std::snprintf(line, sizeof(line), "%-20s %8s\n", "Label", "Count");
  out << line;
  for (Label l : kAllLabels) {
    std::snprintf(line, sizeof(line), "%-20s %8zu\n", std::string(label_name(l)).c_str(),
                  stats.count(l));
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-20s %8zu\n", "Overall", stats.overall);
  out << line;
  return kSuccess;
}

int cmd_build_graph(const GraphCommandOptions& o, std::ostream& out) {
  if (o.scorer == "nli-file" && o.scores.empty()) {
    throw UsageError("--scorer nli-file requires --scores");
  }
  const auto nodes = load_nodes(o.corpus, o.test_corpus);
  const auto features = load_embeddings(o.embeddings, nodes.nodes);
  GraphOptions options;
  options.k = o.k;
  if (o.train_only) {
    options.node_mask.assign(nodes.nodes.size(), false);
    for (auto i : nodes.train_rows) options.node_mask[i] = true;
  }
  std::unique_ptr<EdgeScorer> scorer;
  if (o.scorer == "cosine") {
    scorer = std::make_unique<CosineScorer>(features.values);
  } else {
    scorer = std::make_unique<PrecomputedScorer>(
        PrecomputedScorer::from_file(o.scores, nodes.nodes.ids()));
  }
  if (o.k < 1 || o.k >= nodes.nodes.size()) {
    throw UsageError("--k must satisfy 1 <= k < node count");
  }
  const auto graph = build_graph(features, options, *scorer);

  RunManifest manifest;
  manifest.command = "build-graph";
  manifest.parameters = {{"corpus", o.corpus},     {"test_corpus", o.test_corpus},
                         {"embeddings", o.embeddings}, {"scorer", o.scorer},
                         {"scores", o.scores},     {"k", o.k},
                         {"train_only", o.train_only}, {"out", o.out}};
  manifest.inputs = existing({o.corpus, o.test_corpus, o.embeddings, o.scores});
  const auto manifest_json = manifest.to_json();

  save_graph(graph, o.out);
  write_text(manifest_path_for(o.out), manifest_json.dump(2) + "\n");
  out << "graph: " << graph.node_count() << " nodes, " << graph.edge_count() << " edges (k="
      << o.k << ", scorer=" << o.scorer << ") -> " << o.out << '\n';
  return kSuccess;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  const auto kind = parse_model_kind(o.variant);
  if (!kind) throw UsageError("unknown --variant " + o.variant);
  TrainConfig config;
  config.lr_head = o.lr_head;
  config.lr_gnn = o.lr_gnn;
  config.epochs = o.epochs;
  config.batch_size = o.batch_size;
  config.dropout_rate = o.dropout;
  config.lambda = *kind == ModelKind::Linear ? 0.0 : o.lambda;
  config.gnn_hidden = o.hidden;
  config.gnn_layers = o.layers;
  config.head_hidden = o.head_hidden;
  config.seed = o.seed;
  validate(config);

  const auto nodes = load_nodes(o.corpus, o.test_corpus);
  const auto features = make_features(o.features, nodes, o.embeddings, o.min_df);
  // The linear variant never reads a graph.
  const std::string graph_path = uses_graph(*kind) ? o.graph : "";
  std::optional<PersonaGraph> graph;
  if (uses_graph(*kind)) graph = resolve_graph(graph_path, nodes, o.embeddings, o.k);
  const LabelMatrix labels = labels_to_matrix(nodes.nodes);

  TrainingData data;
  data.features = &features.values;
  data.graph = graph ? &*graph : nullptr;
  data.labels = &labels;
  data.train_rows = nodes.train_rows;
  data.eval_rows = nodes.test_rows.empty() ? nodes.train_rows : nodes.test_rows;
  if (o.validation_fraction > 0.0) {
    const auto split = holdout_split(nodes.train_rows.size(), o.validation_fraction, o.seed);
    data.train_rows = split.train;
    data.eval_rows = split.test;
  }

  out << "training " << o.variant << " on " << data.train_rows.size() << " nodes ("
      << features.name << " features, dim " << features.values.cols() << ")\n";
  const auto result = train_model(data, *kind, config, [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << "  loss " << fixed(r.loss, 6) << "  eval_f1 " << fixed(r.eval_f1)
        << "  threshold " << fixed(r.threshold, 2) << '\n';
  });
  out << "best epoch " << result.best_epoch << "  eval_f1 " << fixed(result.best_f1)
      << "  threshold " << fixed(result.best_threshold, 2) << '\n';

  nlohmann::ordered_json metrics;
  metrics["variant"] = o.variant;
  metrics["features"] = features.name;
  metrics["best_epoch"] = result.best_epoch;
  metrics["best_eval_f1"] = result.best_f1;
  metrics["threshold"] = result.best_threshold;
  if (!nodes.test_rows.empty()) {
    const Matrix probs =
        predict_probabilities(result.params, features.values, data.graph, nodes.test_rows);
    const auto m = multilabel_metrics(probs, take_rows(labels, nodes.test_rows),
                                      result.best_threshold);
    metrics["test"] = {{"f1", m.f1},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"macro_f1", m.macro_f1}};
    out << "test  F1 " << fixed(m.f1) << "  precision " << fixed(m.precision) << "  recall "
        << fixed(m.recall) << "  macro-F1 " << fixed(m.macro_f1) << '\n';
  }
  auto history = nlohmann::ordered_json::array();
  for (const auto& r : result.history) {
    history.push_back(
        {{"epoch", r.epoch}, {"loss", r.loss}, {"eval_f1", r.eval_f1}, {"threshold", r.threshold}});
  }
  metrics["history"] = std::move(history);

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = o.seed;
  manifest.parameters = {{"corpus", o.corpus},
                         {"test_corpus", o.test_corpus},
                         {"embeddings", o.embeddings},
                         {"features", o.features},
                         {"min_df", o.min_df},
                         {"graph", graph_path},
                         {"k", o.k},
                         {"variant", o.variant},
                         {"lambda", config.lambda},
                         {"epochs", o.epochs},
                         {"batch_size", o.batch_size},
                         {"lr_head", o.lr_head},
                         {"lr_gnn", o.lr_gnn},
                         {"dropout", o.dropout},
                         {"hidden", o.hidden},
                         {"layers", o.layers},
                         {"head_hidden", o.head_hidden},
                         {"validation_fraction", o.validation_fraction},
                         {"out", o.out}};
  manifest.inputs = existing({o.corpus, o.test_corpus, o.embeddings, graph_path});
  const auto manifest_json = manifest.to_json();

  save_checkpoint(o.out, result.params, {o.seed, result.best_epoch});
  auto metrics_path = fs::path(o.out);
  metrics_path.replace_extension();
  metrics_path += ".metrics.json";
  write_text(metrics_path, metrics.dump(2) + "\n");
  write_text(manifest_path_for(o.out), manifest_json.dump(2) + "\n");
  out << "checkpoint -> " << o.out << '\n';
  return kSuccess;
}

int cmd_experiment(const ExperimentOptions& o, std::ostream& out) {
  ExperimentConfig config;
  config.fractions = o.fractions;
  config.runs = o.runs;
  config.base_seed = o.seed;
  config.kinds.clear();
  for (const auto& v : o.variants) {
    const auto kind = parse_model_kind(v);
    if (!kind) throw UsageError("unknown variant " + v);
    config.kinds.push_back(*kind);
  }
  config.train.lambda = o.lambda;
  config.train.epochs = o.epochs;
  config.train.batch_size = o.batch_size;
  config.train.lr_head = o.lr_head;
  config.train.lr_gnn = o.lr_gnn;
  config.train.dropout_rate = o.dropout;
  config.train.gnn_hidden = o.hidden;
  config.train.gnn_layers = o.layers;
  config.train.head_hidden = o.head_hidden;
  config.linear_epochs = o.linear_epochs;
  config.validation_fraction = o.validation_fraction;
  config.per_label_thresholds = o.per_label_thresholds;
  config.jobs = o.jobs;
  validate(config);
  if (o.test_corpus.empty()) throw UsageError("experiment requires --test-corpus");

  const auto nodes = load_nodes(o.corpus, o.test_corpus);
  ExperimentSetup setup;
  for (const auto& f : o.features) setup.features.push_back(make_features(f, nodes, o.embeddings, o.min_df));
  setup.labels = labels_to_matrix(nodes.nodes);
  setup.train_rows = nodes.train_rows;
  setup.test_rows = nodes.test_rows;
  std::optional<PersonaGraph> graph;
  bool needs_graph = false;
  for (auto k : config.kinds) needs_graph = needs_graph || uses_graph(k);
  if (needs_graph) {
    graph = resolve_graph(o.graph, nodes, o.embeddings, o.k);
    setup.graph = &*graph;
  }

  const auto report = run_experiment(setup, config);
  const auto table = render_table(report);

  RunManifest manifest;
  manifest.command = "experiment";
  manifest.seed = o.seed;
  manifest.parameters = report_to_json(report, config)["config"];
  manifest.parameters["corpus"] = o.corpus;
  manifest.parameters["test_corpus"] = o.test_corpus;
  manifest.parameters["embeddings"] = o.embeddings;
  manifest.parameters["features"] = o.features;
  manifest.parameters["graph"] = o.graph;
  manifest.parameters["k"] = o.k;
  manifest.parameters["out"] = o.out;
  manifest.inputs = existing({o.corpus, o.test_corpus, o.embeddings, o.graph});
  const auto manifest_json = manifest.to_json();

  write_text(o.out, report_to_json(report, config).dump(2) + "\n");
  auto table_path = fs::path(o.out);
  table_path.replace_extension();
  table_path += ".table.txt";
  write_text(table_path, table);
  write_text(manifest_path_for(o.out), manifest_json.dump(2) + "\n");
  out << table << "report -> " << o.out << '\n';
  return kSuccess;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  SyntheticConfig config;
  config.n = o.n;
  config.dim = o.dim;
  config.clusters = o.clusters;
  config.label_noise = o.noise;
  config.seed = o.seed;
  config.cluster_spread = o.spread;
  config.center_scale = o.center_scale;
  const auto corpus = generate_synthetic_corpus(config);
  const auto split = holdout_split(corpus.dataset.size(), o.test_fraction, o.seed);

  Dataset train, test;
  test.split = SplitTag::Test;
  for (auto i : split.train) train.records.push_back(corpus.dataset.records[i]);
  for (auto i : split.test) test.records.push_back(corpus.dataset.records[i]);

  std::ostringstream train_text, test_text, emb_text;
  write_jsonl(train_text, train);
  write_jsonl(test_text, test);
  write_embeddings_jsonl(emb_text, corpus.features);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = o.seed;
  manifest.parameters = {{"n", o.n},           {"dim", o.dim},
                         {"clusters", o.clusters}, {"noise", o.noise},
                         {"spread", o.spread},  {"center_scale", o.center_scale},
                         {"test_fraction", o.test_fraction}, {"out", o.out}};

  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_text(dir / "train.jsonl", train_text.str());
  write_text(dir / "test.jsonl", test_text.str());
  write_text(dir / "embeddings.jsonl", emb_text.str());
  manifest.save(dir / "manifest.json");
  out << "synthetic corpus: " << train.size() << " train / " << test.size() << " test records, dim "
      << o.dim << " -> " << dir.string() << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Persona classification with semantic k-NN graphs and GraphSAGE"};
  app.name("personagraph");
  app.require_subcommand(1);

  StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Print per-label and overall record counts");
  stats_cmd->add_option("--corpus", stats.corpus, "Corpus JSONL")->required();

  GraphCommandOptions g;
  auto* graph_cmd = app.add_subcommand("build-graph", "Build the weighted persona k-NN graph");
  graph_cmd->add_option("--corpus", g.corpus, "Train corpus JSONL")->required();
  graph_cmd->add_option("--test-corpus", g.test_corpus, "Test corpus JSONL (transductive nodes)");
  graph_cmd->add_option("--embeddings", g.embeddings, "Embedding file used for neighbor search")
      ->required();
  graph_cmd->add_option("--k", g.k, "Neighbors per node")->capture_default_str();
  graph_cmd->add_option("--scorer", g.scorer, "Edge scorer")
      ->check(CLI::IsMember({"cosine", "nli-file"}))
      ->capture_default_str();
  graph_cmd->add_option("--scores", g.scores, "Precomputed pair-score JSONL for --scorer nli-file");
  graph_cmd->add_flag("--train-only", g.train_only, "Search neighbors among train nodes only");
  graph_cmd->add_option("--out", g.out, "Output graph JSON")->required();

  TrainOptions t;
  auto* train_cmd = app.add_subcommand("train", "Train one model and write a checkpoint");
  train_cmd->add_option("--corpus", t.corpus, "Train corpus JSONL")->required();
  train_cmd->add_option("--test-corpus", t.test_corpus, "Test corpus JSONL");
  train_cmd->add_option("--embeddings", t.embeddings, "Embedding file");
  train_cmd->add_option("--features", t.features, "Model input features")
      ->check(CLI::IsMember({"embeddings", "tfidf", "bow"}))
      ->capture_default_str();
  train_cmd->add_option("--min-df", t.min_df, "Minimum document frequency for tfidf/bow")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--graph", t.graph, "Graph JSON (built from --embeddings if omitted)");
  train_cmd->add_option("--k", t.k, "Neighbors when building the graph")->capture_default_str();
  train_cmd->add_option("--variant", t.variant, "Model kind")
      ->check(CLI::IsMember({"linear", "gnn", "fused"}))
      ->capture_default_str();
  train_cmd->add_option("--lambda", t.lambda, "Graph-branch weight for fused logits")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train_cmd->add_option("--epochs", t.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--batch-size", t.batch_size)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr-head", t.lr_head)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lr-gnn", t.lr_gnn)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--dropout", t.dropout)->capture_default_str();
  train_cmd->add_option("--hidden", t.hidden, "GraphSAGE hidden size")->capture_default_str();
  train_cmd->add_option("--layers", t.layers, "GraphSAGE layers")->capture_default_str();
  train_cmd->add_option("--head-hidden", t.head_hidden, "Head dense size (0 = feature dim)");
  train_cmd->add_option("--validation-fraction", t.validation_fraction,
                        "Select the best epoch on this share of the train corpus");
  train_cmd->add_option("--seed", t.seed)->capture_default_str();
  train_cmd->add_option("--out", t.out, "Output checkpoint")->required();

  ExperimentOptions e;
  auto* exp_cmd = app.add_subcommand("experiment", "Run the train-fraction sweep");
  exp_cmd->add_option("--corpus", e.corpus, "Train corpus JSONL")->required();
  exp_cmd->add_option("--test-corpus", e.test_corpus, "Test corpus JSONL")->required();
  exp_cmd->add_option("--embeddings", e.embeddings, "Embedding file");
  exp_cmd->add_option("--features", e.features, "Feature sources")
      ->delimiter(',')
      ->check(CLI::IsMember({"embeddings", "tfidf", "bow"}));
  exp_cmd->add_option("--min-df", e.min_df)->check(CLI::PositiveNumber)->capture_default_str();
  exp_cmd->add_option("--graph", e.graph, "Graph JSON (built from --embeddings if omitted)");
  exp_cmd->add_option("--k", e.k)->capture_default_str();
  exp_cmd->add_option("--variants", e.variants, "Model kinds")
      ->delimiter(',')
      ->check(CLI::IsMember({"linear", "gnn", "fused"}));
  exp_cmd->add_option("--fractions", e.fractions, "Train fractions")->delimiter(',');
  exp_cmd->add_option("--runs", e.runs)->check(CLI::PositiveNumber)->capture_default_str();
  exp_cmd->add_option("--lambda", e.lambda)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  exp_cmd->add_option("--epochs", e.epochs, "Epochs for graph-based variants")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  exp_cmd->add_option("--linear-epochs", e.linear_epochs, "Epochs for the linear variant")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  exp_cmd->add_option("--batch-size", e.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  exp_cmd->add_option("--lr-head", e.lr_head)->check(CLI::PositiveNumber)->capture_default_str();
  exp_cmd->add_option("--lr-gnn", e.lr_gnn)->check(CLI::PositiveNumber)->capture_default_str();
  exp_cmd->add_option("--dropout", e.dropout)->capture_default_str();
  exp_cmd->add_option("--hidden", e.hidden)->capture_default_str();
  exp_cmd->add_option("--layers", e.layers)->capture_default_str();
  exp_cmd->add_option("--head-hidden", e.head_hidden);
  exp_cmd->add_option("--validation-fraction", e.validation_fraction);
  exp_cmd->add_flag("--per-label-thresholds", e.per_label_thresholds);
  exp_cmd->add_option("--seed", e.seed)->capture_default_str();
  exp_cmd->add_option("--jobs", e.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  exp_cmd->add_option("--out", e.out, "Output report JSON")->required();

  SynthOptions s;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic clustered corpus");
  synth_cmd->add_option("--n", s.n)->capture_default_str();
  synth_cmd->add_option("--dim", s.dim)->capture_default_str();
  synth_cmd->add_option("--clusters", s.clusters)->capture_default_str();
  synth_cmd->add_option("--noise", s.noise, "Label flip probability")->capture_default_str();
  synth_cmd->add_option("--spread", s.spread, "Per-coordinate std around cluster centers")
      ->capture_default_str();
  synth_cmd->add_option("--center-scale", s.center_scale)->capture_default_str();
  synth_cmd->add_option("--test-fraction", s.test_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", s.seed)->capture_default_str();
  synth_cmd->add_option("--out", s.out, "Output directory")->required();

  std::vector<std::string> argv_storage;
  argv_storage.push_back("personagraph");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kUsageError;
  }

  try {
    if (*stats_cmd) return cmd_stats(stats, out);
    if (*graph_cmd) return cmd_build_graph(g, out);
    if (*train_cmd) return cmd_train(t, out);
    if (*exp_cmd) return cmd_experiment(e, out);
    if (*synth_cmd) return cmd_synth(s, out);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kUsageError;
  } catch (const NumericalError& ex) {
    err << "numerical failure: " << ex.what() << '\n';
    return kNumericalError;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << '\n';
    return kDataError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace persona::cli
