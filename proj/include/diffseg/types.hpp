#pragma once

#include <Eigen/Core>

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diffseg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sentinel for unlabeled / ignored nodes in label maps.
inline constexpr int kIgnoreLabel = 255;

/// Numerically stable logistic. Saturates to exactly 0 or 1 once the
/// exponential under/overflows, so extreme logits give exact identity
/// limits downstream.
inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// The h' x w' node lattice diffusion operates on. Node ids are row-major:
/// cell (r, c) maps to r * width + c.
struct NodeGrid {
  int height = 0;
  int width = 0;
  int downsample = 1;

  int count() const { return height * width; }
  bool same_shape(const NodeGrid& o) const {
    return height == o.height && width == o.width;
  }
};

/// Grid for an image of the given size under ceil-division downsampling.
inline NodeGrid make_grid(int image_height, int image_width, int downsample) {
  if (image_height < 1 || image_width < 1 || downsample < 1)
    throw std::invalid_argument("make_grid: sizes and downsample factor must be positive");
  return NodeGrid{(image_height + downsample - 1) / downsample,
                  (image_width + downsample - 1) / downsample, downsample};
}

inline int node_index(int row, int col, const NodeGrid& grid) {
  if (row < 0 || row >= grid.height || col < 0 || col >= grid.width)
    throw std::out_of_range("node_index: cell (" + std::to_string(row) + "," +
                            std::to_string(col) + ") outside " + std::to_string(grid.height) +
                            "x" + std::to_string(grid.width) + " grid");
  return row * grid.width + col;
}

inline std::pair<int, int> node_cell(int node, const NodeGrid& grid) {
  if (node < 0 || node >= grid.count())
    throw std::out_of_range("node_cell: node " + std::to_string(node) +
                            " outside grid of " + std::to_string(grid.count()) + " nodes");
  return {node / grid.width, node % grid.width};
}

/// Channel-major image (row-major within a channel), each value in [0, 1].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int ch, int r, int c) const {
    return data[(static_cast<size_t>(ch) * height + r) * width + c];
  }
  double& at(int ch, int r, int c) {
    return data[(static_cast<size_t>(ch) * height + r) * width + c];
  }
};

inline Image make_image(int channels, int height, int width, double fill = 0.0) {
  Image img{channels, height, width, {}};
  img.data.assign(static_cast<size_t>(channels) * height * width, fill);
  return img;
}

/// Throws when the image violates its invariants (extent, finiteness, range).
void check_image(const Image& img);

/// Per-node, per-class scores (N x K), unbounded reals.
struct ScoreMap {
  NodeGrid grid;
  Matrix values;

  int nodes() const { return static_cast<int>(values.rows()); }
  int classes() const { return static_cast<int>(values.cols()); }
};

/// Per-node labels in [0, K) or kIgnoreLabel.
struct LabelMap {
  NodeGrid grid;
  Eigen::VectorXi labels;
};

enum class PoolMode { kAverage, kMax };

struct EngineConfig {
  int num_stages = 5;
  int embed_dim = 16;
  int downsample_factor = 5;
  bool affinity_scale = true;  // scale affinities by 1/sqrt(embed_dim)
  double softmax_temperature = 1.0;
  double standardize_epsilon = 1e-5;
  PoolMode pooling = PoolMode::kAverage;
  std::set<int> skip_stages;  // 1-based stage numbers to omit from the cascade
  int num_classes = 2;
};

/// Returns one message per violated field; empty means the config is valid.
std::vector<std::string> validate_config(const EngineConfig& cfg);

/// validate_config that throws a single aggregated error on failure.
const EngineConfig& require_valid(const EngineConfig& cfg);

}  // namespace diffseg
