#pragma once

#include <array>
#include <vector>

#include "persona/corpus.hpp"
#include "persona/linalg.hpp"

namespace persona {

// Micro-averaged (headline) and macro-averaged scores; 0/0 is taken as 0.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// A probability counts as a positive prediction when >= threshold.
Metrics multilabel_metrics(const Matrix& probs, const LabelMatrix& y, double threshold);
Metrics multilabel_metrics(const Matrix& probs, const LabelMatrix& y,
                           const std::array<double, kLabelCount>& thresholds);

// 0.01, 0.02, ..., 0.99
std::vector<double> threshold_grid();

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};

// Single global threshold maximizing micro-F1; ties go to the lower threshold.
ThresholdChoice threshold_sweep(const Matrix& probs, const LabelMatrix& y);

// Independent per-label thresholds, each maximizing that label's F1.
std::array<ThresholdChoice, kLabelCount> threshold_sweep_per_label(const Matrix& probs,
                                                                   const LabelMatrix& y);

}  // namespace persona
