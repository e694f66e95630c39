#pragma once

#include "diffseg/types.hpp"

#include <limits>

namespace diffseg {

struct IoUReport {
  Vector per_class;  // NaN where the class has an empty union
  double mean = std::numeric_limits<double>::quiet_NaN();
};

/// Intersection-over-union per class and their mean. Nodes whose ground
/// truth is kIgnoreLabel are excluded from both numerator and denominator;
/// classes with an empty union are excluded from the mean.
IoUReport miou(const LabelMap& pred, const LabelMap& truth, int num_classes);

/// Per node, the smallest class index attaining the maximal score.
LabelMap argmax_labels(const ScoreMap& y);

}  // namespace diffseg
