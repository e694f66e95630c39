#include "diffseg/metrics.hpp"

#include <cmath>

namespace diffseg {

IoUReport miou(const LabelMap& pred, const LabelMap& truth, int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("miou: need at least one class");
  if (!pred.grid.same_shape(truth.grid) || pred.labels.size() != truth.labels.size())
    throw std::invalid_argument("miou: prediction and truth grids differ");
  std::vector<long> intersection(num_classes, 0), unions(num_classes, 0);
  for (int i = 0; i < truth.labels.size(); ++i) {
    const int t = truth.labels[i];
    if (t == kIgnoreLabel) continue;
    const int p = pred.labels[i];
    if (t < 0 || t >= num_classes)
      throw std::invalid_argument("miou: truth label " + std::to_string(t) + " at node " +
                                  std::to_string(i) + " outside 0.." +
                                  std::to_string(num_classes - 1));
    if (p != kIgnoreLabel && (p < 0 || p >= num_classes))
      throw std::invalid_argument("miou: predicted label " + std::to_string(p) + " at node " +
                                  std::to_string(i) + " outside 0.." +
                                  std::to_string(num_classes - 1));
    for (int k = 0; k < num_classes; ++k) {
      const bool in_pred = (p == k), in_truth = (t == k);
      if (in_pred && in_truth) ++intersection[k];
      if (in_pred || in_truth) ++unions[k];
    }
  }
  IoUReport report;
  report.per_class = Vector::Constant(num_classes, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int counted = 0;
  for (int k = 0; k < num_classes; ++k) {
    if (unions[k] == 0) continue;  // class absent from both maps
    report.per_class[k] = static_cast<double>(intersection[k]) / unions[k];
    sum += report.per_class[k];
    ++counted;
  }
  if (counted > 0) report.mean = sum / counted;
  return report;
}

LabelMap argmax_labels(const ScoreMap& y) {
  if (y.classes() < 1) throw std::invalid_argument("argmax_labels: need at least one class");
  LabelMap out{y.grid, Eigen::VectorXi(y.nodes())};
  for (int i = 0; i < y.nodes(); ++i) {
    int best = 0;
    for (int k = 1; k < y.classes(); ++k)
      if (y.values(i, k) > y.values(i, best)) best = k;
    out.labels[i] = best;
  }
  return out;
}

}  // namespace diffseg
