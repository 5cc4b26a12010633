#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "persona/corpus.hpp"
#include "persona/errors.hpp"

using namespace persona;

namespace {

const char* kTwoRecords =
    R"({"id":"p1","text":"I am afraid of snakes.","labels":["Characteristics"]})"
    "\n"
    R"({"id":"p2","text":"A lot of my family members are teachers.","labels":["Relationship","Experiences"]})"
    "\n";

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

Dataset numbered(std::size_t n) {
  Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    ds.records.push_back({"r" + std::to_string(i), "text " + std::to_string(i),
                          LabelSet{kAllLabels[i % kLabelCount]}});
  }
  return ds;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("label names round-trip in canonical order") {
    CHECK(label_name(Label::RoutinesOrHabits) == "Routines or Habits");
    CHECK(label_name(Label::GoalsOrPlans) == "Goals or Plans");
    for (Label l : kAllLabels) CHECK(parse_label(label_name(l)) == l);
    CHECK_FALSE(parse_label("Hobbies").has_value());
    CHECK(static_cast<int>(kAllLabels[0]) == 0);
    CHECK(kAllLabels[4] == Label::Relationship);
  }

  TEST_CASE("loading single- and multi-label records") {
    const auto ds = parse(kTwoRecords);
    REQUIRE(ds.size() == 2);
    CHECK(ds.records[0].labels.size() == 1);
    CHECK(ds.records[0].labels.contains(Label::Characteristics));
    CHECK(ds.records[1].labels.size() == 2);
    CHECK(ds.records[1].labels.contains(Label::Relationship));
    CHECK(ds.records[1].labels.contains(Label::Experiences));
  }

  TEST_CASE("invalid lines are rejected with line numbers") {
    CHECK(error_of(R"({"id":"p1","text":"x","labels":[]})") ==
          "line 1: empty label set");
    CHECK(error_of(std::string(kTwoRecords) + "{not json}\n").find("line 3:") == 0);
    CHECK(error_of(R"({"id":"p1","text":"x","labels":["Hobbies"]})").find("unknown label") !=
          std::string::npos);
    CHECK(error_of(R"({"id":"p1","text":"x","labels":["Experiences","Experiences"]})")
              .find("duplicate label") != std::string::npos);
    CHECK(error_of(R"({"id":"p1","labels":["Experiences"]})").find("missing field") !=
          std::string::npos);
    CHECK(error_of(std::string(kTwoRecords) +
                   R"({"id":"p1","text":"again","labels":["Experiences"]})" + "\n")
              .find("line 3: duplicate id") == 0);
  }

  TEST_CASE("blank lines are skipped") {
    CHECK(parse(std::string("\n") + kTwoRecords + "\n\n").size() == 2);
  }

  TEST_CASE("label statistics") {
    const auto stats = label_stats(parse(kTwoRecords));
    CHECK(stats.count(Label::Characteristics) == 1);
    CHECK(stats.count(Label::Relationship) == 1);
    CHECK(stats.count(Label::Experiences) == 1);
    CHECK(stats.count(Label::GoalsOrPlans) == 0);
    CHECK(stats.overall == 2);

    const auto empty = label_stats(Dataset{});
    CHECK(empty.overall == 0);
    for (Label l : kAllLabels) CHECK(empty.count(l) == 0);
  }

  TEST_CASE("label-count fixture") {
    const auto ds = load_jsonl(PERSONA_FIXTURE_DIR "/counts_train.jsonl");
    const auto s = label_stats(ds);
    CHECK(s.count(Label::Experiences) == 1368);
    CHECK(s.count(Label::Characteristics) == 977);
    CHECK(s.count(Label::RoutinesOrHabits) == 272);
    CHECK(s.count(Label::GoalsOrPlans) == 112);
    CHECK(s.count(Label::Relationship) == 160);
    CHECK(s.overall == 2889);
  }

  TEST_CASE("subsampling") {
    const auto ds = numbered(2889);
    CHECK(subsample_fraction(ds, 1.0, 3) == ds);
    const auto a = subsample_fraction(ds, 0.30, 7);
    const auto b = subsample_fraction(ds, 0.30, 7);
    CHECK(a.size() == 867);
    CHECK(a.ids() == b.ids());
    CHECK(subsample_fraction(numbered(100), 0.001, 1).size() == 1);
    CHECK_THROWS_AS(subsample_fraction(ds, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(subsample_fraction(ds, 1.5, 1), std::invalid_argument);
  }

  TEST_CASE("subsample size is the ceiling and ids are a subset") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> f(0.001, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng() % 300;
      const double fraction = f(rng);
      const auto ds = numbered(n);
      const auto sub = subsample_fraction(ds, fraction, trial);
      const auto expect = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
      CHECK(sub.size() == std::max<std::size_t>(1, expect));
      const auto all = ds.ids();
      std::set<std::string> pool(all.begin(), all.end());
      for (const auto& id : sub.ids()) CHECK(pool.count(id) == 1);
    }
  }

  TEST_CASE("label matrix layout") {
    const auto y = labels_to_matrix(parse(kTwoRecords));
    REQUIRE(y.rows() == 2);
    REQUIRE(y.cols() == 5);
    CHECK(y.row(0) == (Eigen::RowVectorXd(5) << 0, 1, 0, 0, 0).finished());
    CHECK(y.row(1) == (Eigen::RowVectorXd(5) << 1, 0, 0, 0, 1).finished());
    const auto empty = labels_to_matrix(Dataset{});
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 5);
  }

  TEST_CASE("column sums of the label matrix match statistics") {
    const auto ds = load_jsonl(PERSONA_FIXTURE_DIR "/labeled_samples.jsonl");
    const auto y = labels_to_matrix(ds);
    const auto s = label_stats(ds);
    CHECK(static_cast<std::size_t>(y.rows()) == s.overall);
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      CHECK(static_cast<std::size_t>(y.col(j).sum()) == s.per_label[j]);
    }
  }

  TEST_CASE("serialization round-trip") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      Dataset ds;
      const std::size_t n = 1 + rng() % 20;
      for (std::size_t i = 0; i < n; ++i) {
        LabelSet labels;
        while (labels.empty()) {
          for (Label l : kAllLabels) {
            if (rng() % 3 == 0) labels.insert(l);
          }
        }
        std::string text = "persona \"" + std::to_string(rng() % 1000) + "\" caf\xc3\xa9\t\\";
        ds.records.push_back({"id" + std::to_string(i), text, labels});
      }
      std::ostringstream out;
      write_jsonl(out, ds);
      CHECK(parse(out.str()) == ds);
    }
  }

  TEST_CASE("holdout split partitions the index range") {
    const auto s = holdout_split(10, 0.2, 4);
    CHECK(s.test.size() == 2);
    CHECK(s.train.size() == 8);
    std::vector<NodeIndex> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    for (NodeIndex i = 0; i < 10; ++i) CHECK(all[i] == i);
  }

  TEST_CASE("concatenation rejects clashing ids") {
    const auto ds = parse(kTwoRecords);
    CHECK_THROWS_AS(concat(ds, ds), DataError);
    CHECK(concat(ds, numbered(3)).size() == 5);
  }
}
