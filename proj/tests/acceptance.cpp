// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "persona/corpus.hpp"
#include "persona/experiment.hpp"
#include "persona/features.hpp"
#include "persona/graph.hpp"
#include "persona/metrics.hpp"
#include "persona/model.hpp"
#include "persona/synthetic.hpp"

using namespace persona;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "%s", e.str().c_str());
  return code;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("persona_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome gradient_check() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  const int instances = 20;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 4 + rng() % 12;
    const std::size_t d = 2 + rng() % 7;
    const auto g = oracle::random_graph(n, 0.35, rng, true);
    const Matrix x = oracle::random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), rng);
    const Matrix y = oracle::random_labels(static_cast<Eigen::Index>(n), rng);
    ModelShape shape;
    shape.input_dim = d;
    shape.gnn_hidden = 3 + rng() % 6;
    shape.gnn_layers = 2;
    shape.head_hidden = 3 + rng() % 6;
    shape.dropout_rate = 0.0;
    shape.lambda = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    auto params = init_params(shape, rng());
    std::normal_distribution<double> b(0.0, 0.1);
    for (auto& layer : params.gnn_layers) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = b(rng);
    }
    const auto plan = PropagationPlan::full(g, 2);
    std::mt19937_64 unused(0);
    const auto grads = backward(params, forward(params, x, plan, false, unused), y);
    const double err = oracle::max_gradient_error(params, grads, [&](const ModelParams& p) {
      std::mt19937_64 r(0);
      return bce_with_logits(forward(p, x, plan, false, r).z, y);
    });
    worst = std::max(worst, err);
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 30.0,
          format("%d instances, max relative error %.2e (limit 1e-4), %.2f s", instances, worst,
                 secs)};
}

Outcome knn_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(7);
  const std::size_t ks[] = {1, 7, 15};
  int mismatches = 0, tie_instances = 0;
  const int instances = 100;
  for (int t = 0; t < instances; ++t) {
    const std::size_t k = ks[t % 3];
    const auto n = static_cast<Eigen::Index>(k + 2 + rng() % (500 - k - 1));
    const auto d = static_cast<Eigen::Index>(2 + rng() % 15);
    Matrix x;
    if (t % 4 == 0) {
      // Coarse integer entries and duplicated rows force exact ties.
      x.resize(n, d);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<double>(rng() % 3);
      for (Eigen::Index i = 1; i < n; i += 5) x.row(i) = x.row(i - 1);
      ++tie_instances;
    } else {
      x = oracle::random_matrix(n, d, rng);
    }
    const auto got = knn_neighbors(x, k);
    const auto want = oracle::brute_force_knn(x, k);
    bool same = true;
    for (std::size_t v = 0; v < got.size() && same; ++v) {
      for (std::size_t j = 0; j < k; ++j) {
        if (got[v][j].index != want[v][j].index ||
            got[v][j].similarity != want[v][j].similarity) {
          same = false;
          break;
        }
      }
    }
    mismatches += same ? 0 : 1;
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 10.0,
          format("%d instances (%d with forced ties), %d mismatches, %.2f s", instances,
                 tie_instances, mismatches, secs)};
}

Outcome fusion_degeneracy() {
  std::mt19937_64 rng(3);
  int failures = 0;
  const int instances = 10;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 5 + rng() % 30;
    const auto g = oracle::random_graph(n, 0.2, rng);
    const Matrix x = oracle::random_matrix(static_cast<Eigen::Index>(n), 6, rng);
    ModelShape shape;
    shape.input_dim = 6;
    shape.gnn_hidden = 8;
    auto params = init_params(shape, rng());
    const auto plan = PropagationPlan::full(g, 2);
    std::mt19937_64 r(0);
    params.lambda = 0.0;
    const Matrix head_only = head_forward(x, params.head, false, r);
    failures += forward(params, x, plan, false, r).z == head_only ? 0 : 1;
    params.lambda = 1.0;
    const Matrix gnn_only = sage_forward(x, g, params.gnn_layers, params.gnn_projection);
    failures += forward(params, x, plan, false, r).z == gnn_only ? 0 : 1;
    failures += combined_logits(gnn_only, head_only, 0.0) == head_only ? 0 : 1;
    failures += combined_logits(gnn_only, head_only, 1.0) == gnn_only ? 0 : 1;
  }
  return {failures == 0, format("%d instances x 4 bitwise comparisons, %d differ", instances,
                                failures)};
}

Outcome loss_oracle() {
  std::mt19937_64 rng(11);
  long double worst = 0.0L;
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng() % 8);
    const Matrix z = oracle::random_matrix(n, 5, rng, 4.0);
    const Matrix y = oracle::random_labels(n, rng);
    worst = std::max(worst, std::abs(static_cast<long double>(bce_with_logits(z, y)) -
                                     oracle::naive_bce(z, y)));
  }
  const Matrix zero = Matrix::Zero(3, 5);
  Matrix y = oracle::random_labels(3, rng);
  const double ln2_err = std::max(std::abs(bce_with_logits(zero, y) - std::log(2.0)),
                                  std::abs(bce_with_logits(zero, Matrix::Ones(3, 5)) - std::log(2.0)));
  return {worst < 1e-9L && ln2_err < 1e-9,
          format("max |stable - naive| %.2e over 200 cases, |loss(z=0) - ln 2| %.2e",
                 static_cast<double>(worst), ln2_err)};
}

Outcome trend_reproduction() {
  const auto start = Clock::now();
  SyntheticConfig sc;
  sc.n = 3000;
  sc.clusters = 8;
  sc.label_noise = 0.1;
  sc.seed = 7;
  const auto corpus = generate_synthetic_corpus(sc);
  const auto split = holdout_split(sc.n, 0.2, sc.seed);
  const auto graph = build_graph(corpus.features, {7, {}}, CosineScorer(corpus.features.values));

  ExperimentSetup setup;
  setup.features.push_back({"emb", corpus.features.values});
  setup.graph = &graph;
  setup.labels = labels_to_matrix(corpus.dataset);
  setup.train_rows = split.train;
  setup.test_rows = split.test;
  ExperimentConfig config;
  config.fractions = {0.01, 1.0};
  config.runs = 10;
  config.base_seed = 3;
  config.kinds = {ModelKind::Linear, ModelKind::Fused};
  const auto report = run_experiment(setup, config);

  const double fused_low = report.cell("emb&fused", 0.01).f1.mean;
  const double linear_low = report.cell("emb&linear", 0.01).f1.mean;
  const double fused_high = report.cell("emb&fused", 1.0).f1.mean;
  const double linear_high = report.cell("emb&linear", 1.0).f1.mean;
  const double gap_low = fused_low - linear_low;
  const double gap_high = fused_high - linear_high;
  const double secs = seconds_since(start);
  return {gap_low >= 0.02 && std::abs(gap_high) < 0.05 && secs < 600.0,
          format("1%%: fused %.4f vs linear %.4f (gap %+.4f, need >= 0.02); 100%%: fused %.4f vs "
                 "linear %.4f (gap %+.4f, need < 0.05); %.1f s",
                 fused_low, linear_low, gap_low, fused_high, linear_high, gap_high, secs)};
}

Outcome tfidf_hand_check() {
  Dataset ds;
  ds.records = {{"d0", "a b", LabelSet{Label::Experiences}},
                {"d1", "b c", LabelSet{Label::Experiences}}};
  const auto vocab = fit_vocabulary(ds, 1);
  const double idf_b = vocab.idf(static_cast<std::size_t>(vocab.index_of("b")));
  const double idf_a = vocab.idf(static_cast<std::size_t>(vocab.index_of("a")));
  const auto m = tfidf_transform(ds, vocab);
  double norm_err = 0.0;
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    norm_err = std::max(norm_err, std::abs(m.values.row(r).norm() - 1.0));
  }
  const double want_a = std::log(1.5) + 1.0;
  const bool ok = std::abs(idf_b - 1.0) < 1e-6 && std::abs(idf_a - want_a) < 1e-6 && norm_err < 1e-6;
  return {ok, format("idf(b) = %.6f, idf(a) = %.6f (expected %.6f), max |row norm - 1| %.1e",
                     idf_b, idf_a, want_a, norm_err)};
}

Outcome sweep_equivalence() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng() % 60);
    Matrix probs(n, 5);
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      probs.data()[i] = t % 2 ? u(rng) : std::round(u(rng) * 10) / 10;
    }
    const Matrix y = oracle::random_labels(n, rng);
    const auto got = threshold_sweep(probs, y);
    const auto [thr, f1] = oracle::exhaustive_sweep(probs, y);
    if (std::abs(got.threshold - thr) > 1e-12 || std::abs(got.f1 - f1) > 1e-12) ++mismatches;
  }
  return {mismatches == 0, format("50 instances, %d mismatches", mismatches)};
}

Outcome fixture_fidelity() {
  std::string out;
  const int code = cli({"stats", "--corpus", PERSONA_FIXTURE_DIR "/counts_train.jsonl"}, &out);
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"Experiences", "1368"},   {"Characteristics", "977"}, {"Routines or Habits", "272"},
      {"Goals or Plans", "112"}, {"Relationship", "160"},    {"Overall", "2889"}};
  int found = 0;
  std::istringstream lines(out);
  std::string line;
  while (std::getline(lines, line)) {
    const auto cut = line.find_last_of(' ');
    if (cut == std::string::npos) continue;
    const auto label_end = line.find_last_not_of(' ', cut);
    const std::string label = line.substr(0, label_end + 1);
    const std::string count = line.substr(cut + 1);
    for (const auto& [want_label, want_count] : expected) {
      if (label == want_label && count == want_count) ++found;
    }
  }
  return {code == 0 && found == 6, format("exit %d, %d of 6 rows match", code, found)};
}

Outcome determinism() {
  const auto dir = scratch("determinism");
  if (cli({"synth", "--n", "300", "--seed", "4", "--out", (dir / "data").string()}) != 0) {
    return {false, "synth failed"};
  }
  const auto data = dir / "data";
  std::vector<std::string> args{"experiment", "--corpus", (data / "train.jsonl").string(),
                                "--test-corpus", (data / "test.jsonl").string(),
                                "--embeddings", (data / "embeddings.jsonl").string(),
                                "--fractions", "0.3,1.0", "--runs", "2", "--seed", "9"};
  auto first = args, second = args;
  first.insert(first.end(), {"--out", (dir / "first.json").string()});
  second.insert(second.end(), {"--out", (dir / "second.json").string()});
  if (cli(first) != 0 || cli(second) != 0) return {false, "experiment failed"};
  const auto a = slurp(dir / "first.json");
  const auto b = slurp(dir / "second.json");
  return {!a.empty() && a == b, format("two reports of %zu and %zu bytes, %s", a.size(), b.size(),
                                       a == b ? "identical" : "different")};
}

Outcome end_to_end() {
  const auto dir = scratch("pipeline");
  const auto start = Clock::now();
  const auto data = dir / "data";
  int code = cli({"synth", "--n", "3000", "--seed", "1", "--out", data.string()});
  if (code == 0) {
    code = cli({"build-graph", "--corpus", (data / "train.jsonl").string(), "--test-corpus",
                (data / "test.jsonl").string(), "--embeddings",
                (data / "embeddings.jsonl").string(), "--k", "7", "--out",
                (dir / "graph.json").string()});
  }
  std::string out;
  if (code == 0) {
    code = cli({"train", "--corpus", (data / "train.jsonl").string(), "--test-corpus",
                (data / "test.jsonl").string(), "--embeddings",
                (data / "embeddings.jsonl").string(), "--graph", (dir / "graph.json").string(),
                "--variant", "fused", "--epochs", "20", "--out", (dir / "model.ckpt").string()},
               &out);
  }
  const double secs = seconds_since(start);
  const auto at = out.find("test  F1 ");
  const std::string f1 = at == std::string::npos ? "n/a" : out.substr(at + 9, 6);
  return {code == 0 && at != std::string::npos && secs < 60.0,
          format("exit %d, test F1 %s, %.1f s (limit 60 s)", code, f1.c_str(), secs)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_check},
      {2, "k-NN oracle equivalence", knn_equivalence},
      {3, "fusion degeneracy", fusion_degeneracy},
      {4, "loss oracle", loss_oracle},
      {5, "trend reproduction", trend_reproduction},
      {6, "TF-IDF hand check", tfidf_hand_check},
      {7, "threshold sweep equivalence", sweep_equivalence},
      {8, "fixture fidelity", fixture_fidelity},
      {9, "determinism", determinism},
      {10, "end-to-end scale", end_to_end},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
