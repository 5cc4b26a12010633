#pragma once

#include <cstdint>
#include <vector>

#include "persona/corpus.hpp"
#include "persona/features.hpp"

namespace persona {

struct SyntheticConfig {
  std::size_t n = 1000;
  std::size_t dim = 32;
  std::size_t clusters = 8;
  double label_noise = 0.1;  // independent flip probability per (record, label)
  std::uint64_t seed = 0;
  double center_scale = 1.0;    // per-coordinate std of cluster centers
  double cluster_spread = 1.0;  // per-coordinate std of points around a center
};

// Gaussian clusters; every cluster owns a label pattern of one or two labels,
// so nearby rows tend to share labels. Labels are then flipped independently
// with probability label_noise, redrawing any record whose flips would leave
// it without labels.
struct SyntheticCorpus {
  Dataset dataset;
  FeatureMatrix features;
  std::vector<std::size_t> cluster_of;
  std::vector<LabelSet> patterns;  // per cluster, before noise
};

// Throws std::invalid_argument for clusters < 2, n < clusters, dim == 0 or
// label_noise outside [0, 0.5).
SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace persona
