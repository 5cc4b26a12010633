#include "persona/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace persona {

namespace {

constexpr std::array<std::array<const char*, 4>, kLabelCount> kPhrases = {{
    {"i grew up near", "i used to work at", "i once visited", "i moved away from"},
    {"i am afraid of", "i really love", "i feel calm around", "i prefer"},
    {"every morning i walk to", "i usually cook at", "each weekend i clean", "i jog daily past"},
    {"i want to buy", "i plan to visit", "i hope to open", "someday i will build"},
    {"my sister likes", "my family owns", "my best friend runs", "my parents love"},
}};

constexpr std::array<const char*, 16> kTopics = {
    "the lake",   "a bakery",   "snakes",   "the mountains", "a farm",     "the city",
    "old cars",   "the museum", "a garden", "the ocean",     "a library",  "the gym",
    "the forest", "a theater",  "cats",     "the market"};

std::vector<LabelSet> choose_patterns(std::size_t clusters, std::mt19937_64& rng) {
  std::vector<LabelSet> singles, pairs, triples;
  for (std::size_t a = 0; a < kLabelCount; ++a) {
    singles.push_back({kAllLabels[a]});
    for (std::size_t b = a + 1; b < kLabelCount; ++b) {
      pairs.push_back({kAllLabels[a], kAllLabels[b]});
      for (std::size_t c = b + 1; c < kLabelCount; ++c) {
        triples.push_back({kAllLabels[a], kAllLabels[b], kAllLabels[c]});
      }
    }
  }
  std::vector<LabelSet> pool = singles;
  pool.insert(pool.end(), pairs.begin(), pairs.end());
  std::shuffle(pool.begin(), pool.end(), rng);
  std::shuffle(triples.begin(), triples.end(), rng);
  pool.insert(pool.end(), triples.begin(), triples.end());
  std::vector<LabelSet> out;
  for (std::size_t c = 0; c < clusters; ++c) out.push_back(pool[c % pool.size()]);
  return out;
}

std::string make_text(const LabelSet& labels, std::size_t cluster, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> phrase(0, 3);
  const std::string topic = kTopics[cluster % kTopics.size()];
  std::string text;
  for (Label l : labels.to_vector()) {
    if (!text.empty()) text += " and ";
    text += kPhrases[static_cast<std::size_t>(l)][phrase(rng)];
    text += " " + topic;
  }
  text[0] = 'I';
  return text + ".";
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
  if (config.clusters < 2) throw std::invalid_argument("need at least 2 clusters");
  if (config.n < config.clusters) throw std::invalid_argument("need at least one row per cluster");
  if (config.dim == 0) throw std::invalid_argument("dim must be positive");
  if (!(config.label_noise >= 0.0 && config.label_noise < 0.5)) {
    throw std::invalid_argument("label noise must lie in [0, 0.5)");
  }
  if (!(config.center_scale > 0.0) || !(config.cluster_spread >= 0.0)) {
    throw std::invalid_argument("center scale must be positive and spread non-negative");
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution flip(config.label_noise);

  SyntheticCorpus out;
  out.patterns = choose_patterns(config.clusters, rng);
  const auto dim = static_cast<Eigen::Index>(config.dim);
  Matrix centers(static_cast<Eigen::Index>(config.clusters), dim);
  for (Eigen::Index i = 0; i < centers.size(); ++i) {
    centers.data()[i] = config.center_scale * gauss(rng);
  }

  out.features.values.resize(static_cast<Eigen::Index>(config.n), dim);
  out.dataset.records.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const std::size_t c = i % config.clusters;
    out.cluster_of.push_back(c);
    for (Eigen::Index j = 0; j < dim; ++j) {
      out.features.values(static_cast<Eigen::Index>(i), j) =
          centers(static_cast<Eigen::Index>(c), j) + config.cluster_spread * gauss(rng);
    }
    LabelSet labels;
    do {
      labels = LabelSet{};
      for (Label l : kAllLabels) {
        if (out.patterns[c].contains(l) != flip(rng)) labels.insert(l);
      }
    } while (labels.empty());

    char id[32];
    std::snprintf(id, sizeof(id), "s%06zu", i);
    out.dataset.records.push_back({id, make_text(labels, c, rng), labels});
    out.features.row_ids.emplace_back(id);
  }
  return out;
}

}  // namespace persona
