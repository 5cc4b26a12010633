#include "persona/metrics.hpp"

#include <stdexcept>

namespace persona {

namespace {

struct Counts {
  double tp = 0;
  double fp = 0;
  double fn = 0;
};

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

void check_shapes(const Matrix& probs, const LabelMatrix& y) {
  if (probs.rows() != y.rows() || probs.cols() != y.cols() ||
      probs.cols() != static_cast<Eigen::Index>(kLabelCount)) {
    throw std::invalid_argument("metrics: probabilities and labels must both be n x 5");
  }
}

void check_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
}

Counts count_column(const Matrix& probs, const LabelMatrix& y, Eigen::Index j, double threshold) {
  Counts c;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const bool predicted = probs(i, j) >= threshold;
    const bool actual = y(i, j) > 0.5;
    if (predicted && actual) c.tp += 1;
    if (predicted && !actual) c.fp += 1;
    if (!predicted && actual) c.fn += 1;
  }
  return c;
}

}  // namespace

Metrics multilabel_metrics(const Matrix& probs, const LabelMatrix& y,
                           const std::array<double, kLabelCount>& thresholds) {
  check_shapes(probs, y);
  for (double t : thresholds) check_threshold(t);
  Metrics m;
  Counts total;
  for (std::size_t j = 0; j < kLabelCount; ++j) {
    const auto c = count_column(probs, y, static_cast<Eigen::Index>(j), thresholds[j]);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    const double p = ratio(c.tp, c.tp + c.fp);
    const double r = ratio(c.tp, c.tp + c.fn);
    m.macro_precision += p / kLabelCount;
    m.macro_recall += r / kLabelCount;
    m.macro_f1 += f1_of(p, r) / kLabelCount;
  }
  m.precision = ratio(total.tp, total.tp + total.fp);
  m.recall = ratio(total.tp, total.tp + total.fn);
  m.f1 = f1_of(m.precision, m.recall);
  return m;
}

Metrics multilabel_metrics(const Matrix& probs, const LabelMatrix& y, double threshold) {
  std::array<double, kLabelCount> t;
  t.fill(threshold);
  return multilabel_metrics(probs, y, t);
}

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  grid.reserve(99);
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  return grid;
}

ThresholdChoice threshold_sweep(const Matrix& probs, const LabelMatrix& y) {
  check_shapes(probs, y);
  ThresholdChoice best{-1.0, -1.0};
  for (double t : threshold_grid()) {
    const double f1 = multilabel_metrics(probs, y, t).f1;
    if (f1 > best.f1) best = {t, f1};
  }
  return best;
}

std::array<ThresholdChoice, kLabelCount> threshold_sweep_per_label(const Matrix& probs,
                                                                   const LabelMatrix& y) {
  check_shapes(probs, y);
  std::array<ThresholdChoice, kLabelCount> best;
  best.fill({-1.0, -1.0});
  for (double t : threshold_grid()) {
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      const auto c = count_column(probs, y, static_cast<Eigen::Index>(j), t);
      const double f1 = f1_of(ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn));
      if (f1 > best[j].f1) best[j] = {t, f1};
    }
  }
  return best;
}

}  // namespace persona
