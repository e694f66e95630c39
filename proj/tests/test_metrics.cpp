#include "diffseg/metrics.hpp"

#include "doctest.h"
#include "testutil.hpp"

#include <cmath>

using namespace diffseg;
using testutil::line_grid;

namespace {

LabelMap labels_of(std::initializer_list<int> values) {
  LabelMap out{line_grid(static_cast<int>(values.size())),
               Eigen::VectorXi(static_cast<int>(values.size()))};
  int i = 0;
  for (int v : values) out.labels[i++] = v;
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("perfect prediction scores 1") {
    const LabelMap truth = labels_of({0, 1, 2, 1, 0});
    const IoUReport report = miou(truth, truth, 3);
    CHECK_EQ(report.mean, 1.0);
    for (int k = 0; k < 3; ++k) CHECK_EQ(report.per_class[k], 1.0);
  }

  TEST_CASE("complement prediction scores 0 on a binary map") {
    const LabelMap truth = labels_of({0, 0, 1, 1});
    const LabelMap pred = labels_of({1, 1, 0, 0});
    CHECK_EQ(miou(pred, truth, 2).mean, 0.0);
  }

  TEST_CASE("four-node hand instance: 1/2 and 2/3 average to 7/12") {
    const LabelMap truth = labels_of({0, 0, 1, 1});
    const LabelMap pred = labels_of({0, 1, 1, 1});
    const IoUReport report = miou(pred, truth, 2);
    CHECK_EQ(report.per_class[0], doctest::Approx(0.5).epsilon(1e-15));
    CHECK_EQ(report.per_class[1], doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_EQ(report.mean, doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  }

  TEST_CASE("ignored truth nodes are excluded from both sides") {
    const LabelMap truth = labels_of({0, kIgnoreLabel, 1, kIgnoreLabel});
    const LabelMap pred = labels_of({0, 0, 1, 1});  // wrong only at ignored nodes
    CHECK_EQ(miou(pred, truth, 2).mean, 1.0);
  }

  TEST_CASE("classes with an empty union are left out of the mean") {
    const LabelMap truth = labels_of({0, 0, 1, 1});
    const LabelMap pred = labels_of({0, 1, 1, 1});
    const IoUReport report = miou(pred, truth, 5);
    CHECK(std::isnan(report.per_class[2]));
    CHECK(std::isnan(report.per_class[4]));
    CHECK_EQ(report.mean, doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  }

  TEST_CASE("grid mismatches and bad labels are rejected") {
    const LabelMap a = labels_of({0, 1});
    const LabelMap b = labels_of({0, 1, 0});
    CHECK_THROWS_AS(miou(a, b, 2), std::invalid_argument);
    const LabelMap bad = labels_of({0, 7});
    CHECK_THROWS_AS(miou(a, bad, 2), std::invalid_argument);   // truth out of range
    CHECK_THROWS_AS(miou(bad, a, 2), std::invalid_argument);   // prediction out of range
  }

  TEST_CASE("argmax takes the smallest index among ties") {
    ScoreMap y{line_grid(3), Matrix::Zero(3, 3)};
    y.values.row(0) << 0.0, 0.0, 0.0;  // full tie
    y.values.row(1) << 1.0, 3.0, 2.0;
    y.values.row(2) << 2.0, 1.0, 2.0;  // tie between 0 and 2
    const LabelMap labels = argmax_labels(y);
    CHECK_EQ(labels.labels[0], 0);
    CHECK_EQ(labels.labels[1], 1);
    CHECK_EQ(labels.labels[2], 0);
  }

  TEST_CASE("all-zero scores label everything as class 0") {
    const ScoreMap y{line_grid(4), Matrix::Zero(4, 3)};
    const LabelMap labels = argmax_labels(y);
    for (int i = 0; i < 4; ++i) CHECK_EQ(labels.labels[i], 0);
  }
}
