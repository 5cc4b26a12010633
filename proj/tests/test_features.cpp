#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "persona/corpus.hpp"
#include "persona/errors.hpp"
#include "persona/features.hpp"

using namespace persona;

namespace {

Dataset corpus(std::initializer_list<const char*> texts) {
  Dataset ds;
  std::size_t i = 0;
  for (const char* t : texts) {
    ds.records.push_back({"d" + std::to_string(i++), t, LabelSet{Label::Experiences}});
  }
  return ds;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("persona_features_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("tokenizer") {
    CHECK(tokenize("I love swimming.") == std::vector<std::string>{"i", "love", "swimming"});
    CHECK(tokenize("I don't like ice cream") ==
          std::vector<std::string>{"i", "don", "t", "like", "ice", "cream"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  --  ").empty());
    CHECK(tokenize("Caf\xc3\xa9 42") == std::vector<std::string>{"caf\xc3\xa9", "42"});
  }

  TEST_CASE("vocabulary") {
    const auto ds = corpus({"a b", "b c"});
    const auto v = fit_vocabulary(ds, 1);
    CHECK(v.tokens() == std::vector<std::string>{"a", "b", "c"});
    CHECK(v.document_frequency(static_cast<std::size_t>(v.index_of("b"))) == 2);
    CHECK(v.index_of("zzz") == -1);
    const auto v2 = fit_vocabulary(ds, 2);
    CHECK(v2.tokens() == std::vector<std::string>{"b"});
    CHECK_THROWS(fit_vocabulary(Dataset{}, 1));
  }

  TEST_CASE("bag of words") {
    const auto ds = corpus({"a b", "b c"});
    const auto v = fit_vocabulary(ds, 1);
    const auto m = bow_transform(ds, v);
    Matrix expect(2, 3);
    expect << 1, 1, 0, 0, 1, 1;
    CHECK(m.values == expect);
    const auto one = bow_transform(corpus({"b b c"}), v);
    CHECK(one.values.row(0) == (Eigen::RowVectorXd(3) << 0, 2, 1).finished());
    const auto oov = bow_transform(corpus({"x y z"}), v);
    CHECK(oov.values.isZero(0.0));
  }

  TEST_CASE("tf-idf weights and normalization") {
    const auto ds = corpus({"a b", "b c"});
    const auto v = fit_vocabulary(ds, 1);
    CHECK(std::abs(v.idf(static_cast<std::size_t>(v.index_of("b"))) - 1.0) < 1e-12);
    CHECK(std::abs(v.idf(static_cast<std::size_t>(v.index_of("a"))) - (std::log(1.5) + 1.0)) <
          1e-12);
    CHECK(std::abs(v.idf(static_cast<std::size_t>(v.index_of("a"))) - 1.405465) < 1e-6);
    const auto m = tfidf_transform(ds, v);
    const double ia = std::log(1.5) + 1.0;
    const double norm = std::sqrt(ia * ia + 1.0);
    CHECK(m.values(0, 0) == doctest::Approx(ia / norm).epsilon(1e-12));
    CHECK(m.values(0, 1) == doctest::Approx(1.0 / norm).epsilon(1e-12));
    CHECK(m.values(0, 2) == 0.0);
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
      CHECK(std::abs(m.values.row(r).norm() - 1.0) < 1e-6);
    }
    CHECK(tfidf_transform(corpus({"q"}), v).values.isZero(0.0));
  }

  TEST_CASE("l2 normalization") {
    FeatureMatrix m;
    m.values = Matrix(3, 2);
    m.values << 3, 4, 0, 0, 0.6, 0.8;
    m.row_ids = {"a", "b", "c"};
    const auto n = l2_normalize(m);
    CHECK(n.values(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n.values(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(n.values.row(1).isZero(0.0));
    CHECK((n.values.row(2) - m.values.row(2)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("embedding files in both formats align to corpus order") {
    FeatureMatrix m;
    m.values = Matrix(2, 3);
    m.values << 1, 2, 3, 4, 5, 6.5;
    m.row_ids = {"p1", "p2"};
    std::ostringstream jsonl, bin;
    write_embeddings_jsonl(jsonl, m);
    write_embeddings_binary(bin, m);

    Dataset ds;
    ds.records = {{"p2", "second", LabelSet{Label::Experiences}},
                  {"p1", "first", LabelSet{Label::Experiences}}};
    for (const auto& [name, text] :
         {std::pair{"a.jsonl", jsonl.str()}, std::pair{"b.bin", bin.str()}}) {
      const auto aligned = load_embeddings(temp_file(name, text), ds);
      CHECK(aligned.row_ids == std::vector<std::string>{"p2", "p1"});
      CHECK(aligned.values.row(0) == m.values.row(1));
      CHECK(aligned.values.row(1) == m.values.row(0));
    }
  }

  TEST_CASE("embedding errors") {
    Dataset ds;
    ds.records = {{"p1", "a", LabelSet{Label::Experiences}},
                  {"p3", "b", LabelSet{Label::Experiences}}};
    const auto path = temp_file("missing.jsonl", "{\"id\":\"p1\",\"vector\":[1,2]}\n");
    try {
      load_embeddings(path, ds);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("p3") != std::string::npos);
    }

    EmbeddingTable table;
    table.ids = {"p1", "p3"};
    table.vectors = Matrix(2, 2);
    table.vectors << 1, std::numeric_limits<double>::quiet_NaN(), 0, 1;
    CHECK_THROWS_AS(align_embeddings(table, ds), DataError);

    const auto ragged =
        temp_file("ragged.jsonl", "{\"id\":\"p1\",\"vector\":[1,2]}\n{\"id\":\"p3\",\"vector\":[1]}\n");
    CHECK_THROWS_AS(load_embeddings(ragged, ds), DataError);
  }

  TEST_CASE("embedding rows follow a permutation of the corpus") {
    FeatureMatrix m;
    m.values = Matrix(4, 2);
    m.values << 1, 0, 0, 1, 2, 2, -1, 3;
    m.row_ids = {"a", "b", "c", "d"};
    std::ostringstream jsonl;
    write_embeddings_jsonl(jsonl, m);
    const auto path = temp_file("perm.jsonl", jsonl.str());
    Dataset ds;
    for (const char* id : {"c", "a", "d", "b"}) {
      ds.records.push_back({id, "t", LabelSet{Label::Experiences}});
    }
    const auto aligned = load_embeddings(path, ds);
    const int source[] = {2, 0, 3, 1};
    for (int r = 0; r < 4; ++r) CHECK(aligned.values.row(r) == m.values.row(source[r]));
  }
}
