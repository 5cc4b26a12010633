#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "persona/errors.hpp"
#include "persona/graph.hpp"

using namespace persona;

namespace {

FeatureMatrix features_of(const Matrix& values) {
  FeatureMatrix f;
  f.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) f.row_ids.push_back("n" + std::to_string(i));
  return f;
}

bool same_as_oracle(const NeighborLists& got,
                    const std::vector<std::vector<oracle::Candidate>>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t v = 0; v < got.size(); ++v) {
    if (got[v].size() != want[v].size()) return false;
    for (std::size_t j = 0; j < got[v].size(); ++j) {
      if (got[v][j].index != want[v][j].index) return false;
      if (got[v][j].similarity != want[v][j].similarity) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("cosine similarity") {
    const std::vector<double> a{1, 0}, b{0, 1}, c{1, 1}, z{0, 0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, b) == 0.0);
    CHECK(std::abs(cosine_similarity(c, a) - 0.7071) < 1e-4);
    CHECK(cosine_similarity(a, z) == 0.0);
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(cosine_similarity(a, three), std::invalid_argument);
  }

  TEST_CASE("k-NN tie-breaking and duplicates") {
    const Matrix eye = Matrix::Identity(3, 3);
    const auto nb = knn_neighbors(eye, 1);
    CHECK(nb[0][0].index == 1);
    CHECK(nb[1][0].index == 0);
    CHECK(nb[2][0].index == 0);

    Matrix dup(3, 2);
    dup << 1, 2, 5, -1, 1, 2;
    const auto d = knn_neighbors(dup, 1);
    CHECK(d[0][0].index == 2);
    CHECK(d[2][0].index == 0);
    CHECK(d[0][0].similarity == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(knn_neighbors(eye, 0), std::invalid_argument);
    CHECK_THROWS_AS(knn_neighbors(eye, 3), std::invalid_argument);
  }

  TEST_CASE("k-NN matches an exhaustive scan") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix x = oracle::random_matrix(200, 16, rng);
      CHECK(same_as_oracle(knn_neighbors(x, 7), oracle::brute_force_knn(x, 7)));
    }
    // Small integer entries produce many exact ties.
    for (int trial = 0; trial < 20; ++trial) {
      Matrix x(60, 3);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<double>(rng() % 3);
      CHECK(same_as_oracle(knn_neighbors(x, 5), oracle::brute_force_knn(x, 5)));
    }
  }

  TEST_CASE("masked nodes neither search nor get found") {
    std::mt19937_64 rng(3);
    const Matrix x = oracle::random_matrix(30, 4, rng);
    std::vector<bool> mask(30, false);
    for (int i = 0; i < 30; i += 2) mask[i] = true;
    const auto nb = knn_neighbors(x, 3, &mask);
    for (std::size_t v = 0; v < 30; ++v) {
      if (!mask[v]) {
        CHECK(nb[v].empty());
        continue;
      }
      CHECK(nb[v].size() == 3);
      for (const auto& n : nb[v]) CHECK(mask[n.index]);
    }
  }

  TEST_CASE("pair scoring symmetrizes directional scores") {
    const std::vector<std::string> ids{"u", "v", "w"};
    PrecomputedScorer scorer({{{"u", "v"}, 0.9}, {{"v", "u"}, 0.7}}, ids);
    NeighborLists nb(3);
    nb[0] = {{1, 0.5}};
    const auto scores = score_pairs(nb, scorer);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].src == 0);
    CHECK(scores[0].dst == 1);
    CHECK(scores[0].score == doctest::Approx(0.8).epsilon(1e-15));

    nb[2] = {{0, 0.1}};
    try {
      score_pairs(nb, scorer);
      FAIL("expected a missing pair");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()) == "missing score for pair (u,w)");
    }

    PrecomputedScorer bad({{{"u", "v"}, 1.5}, {{"v", "u"}, 1.5}}, ids);
    nb[2].clear();
    CHECK_THROWS_AS(score_pairs(nb, bad), DataError);
  }

  TEST_CASE("precomputed scores load from JSONL") {
    std::istringstream in(R"({"src":"a","dst":"b","score":0.25})"
                          "\n"
                          R"({"src":"b","dst":"a","score":0.75})"
                          "\n");
    const auto scorer = PrecomputedScorer::from_stream(in, {"a", "b"});
    CHECK(scorer.score(0, 1) == 0.25);
    CHECK(scorer.score(1, 0) == 0.75);
  }

  TEST_CASE("cosine scorer on identical unit vectors") {
    Matrix x(2, 2);
    x << 0.6, 0.8, 0.6, 0.8;
    const auto g = build_graph(features_of(x), {1, {}}, CosineScorer(x));
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges()[0] == WeightedEdge{0, 1, 1.0});
  }

  TEST_CASE("two separated clusters never connect") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> jitter(0.0, 0.01);
    Matrix x(10, 3);
    for (Eigen::Index i = 0; i < 10; ++i) {
      const bool first = i < 5;
      x(i, 0) = (first ? 1.0 : 0.0) + jitter(rng);
      x(i, 1) = (first ? 0.0 : 1.0) + jitter(rng);
      x(i, 2) = jitter(rng);
    }
    // Margin check: every within-cluster cosine beats every cross-cluster cosine.
    double worst_within = 1.0, best_across = -1.0;
    for (Eigen::Index i = 0; i < 10; ++i) {
      for (Eigen::Index j = 0; j < 10; ++j) {
        if (i == j) continue;
        const double c = x.row(i).dot(x.row(j)) / (x.row(i).norm() * x.row(j).norm());
        if ((i < 5) == (j < 5)) {
          worst_within = std::min(worst_within, c);
        } else {
          best_across = std::max(best_across, c);
        }
      }
    }
    REQUIRE(worst_within > best_across);
    const auto g = build_graph(features_of(x), {2, {}}, CosineScorer(x));
    for (const auto& e : g.edges()) CHECK((e.u < 5) == (e.v < 5));
  }

  TEST_CASE("edge count and weight bounds") {
    std::mt19937_64 rng(77);
    const Matrix x = oracle::random_matrix(500, 8, rng);
    const auto g = build_graph(features_of(x), {7, {}}, CosineScorer(x));
    CHECK(g.edge_count() <= 500 * 7);
    CHECK(g.edge_count() >= 500 * 7 / 2);
    for (const auto& e : g.edges()) {
      CHECK(e.u < e.v);
      CHECK(e.weight >= 0.0);
      CHECK(e.weight <= 1.0);
    }
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
      for (const auto& a : g.neighbors(v)) {
        bool found = false;
        for (const auto& back : g.neighbors(a.node)) found |= back.node == v && back.weight == a.weight;
        CHECK(found);
      }
    }
    const auto again = build_graph(features_of(x), {7, {}}, CosineScorer(x));
    CHECK(again == g);
  }

  TEST_CASE("save and load round-trip") {
    std::mt19937_64 rng(4);
    const Matrix x = oracle::random_matrix(40, 5, rng);
    const auto g = build_graph(features_of(x), {7, {}}, CosineScorer(x));
    std::stringstream buf;
    write_graph(buf, g);
    CHECK(read_graph(buf) == g);
  }

  TEST_CASE("malformed graph files are rejected") {
    std::istringstream dup(R"({"n_nodes":3,"edges":[[0,1,0.5],[0,1,0.5]]})");
    CHECK_THROWS_AS(read_graph(dup), DataError);
    std::istringstream loop(R"({"n_nodes":3,"edges":[[1,1,0.5]]})");
    CHECK_THROWS_AS(read_graph(loop), DataError);
    std::istringstream range(R"({"n_nodes":2,"edges":[[0,2,0.5]]})");
    CHECK_THROWS_AS(read_graph(range), DataError);
    std::istringstream weight(R"({"n_nodes":2,"edges":[[0,1,1.5]]})");
    CHECK_THROWS_AS(read_graph(weight), DataError);
  }

  TEST_CASE("alignment permutes nodes by id") {
    PersonaGraph g(3, {{0, 1, 0.5}, {1, 2, 0.25}}, {"a", "b", "c"});
    const auto h = g.aligned_to({"c", "a", "b"});
    CHECK(h.ids() == std::vector<std::string>{"c", "a", "b"});
    CHECK(h.edges() == std::vector<WeightedEdge>{{0, 2, 0.25}, {1, 2, 0.5}});
  }
}
