#pragma once

#include "diffseg/types.hpp"

namespace diffseg {

struct SeedEntry {
  int node = 0;
  int label = 0;
  double confidence = 1.0;  // strictly positive
};

/// Sparse class evidence on the node grid; (node, label) pairs are unique.
struct SparseSeeds {
  std::vector<SeedEntry> entries;
};

struct PixelSeedEntry {
  int row = 0;
  int col = 0;
  int label = 0;
  double confidence = 1.0;
};

/// Seeds at full image resolution, as read from seed files or scribbles.
struct PixelSeeds {
  std::vector<PixelSeedEntry> entries;
};

/// Collapses image-resolution seeds onto the node grid by confidence-weighted
/// majority vote within each downsample block; ties go to the lowest label.
/// The winning label keeps its accumulated confidence.
SparseSeeds to_node_seeds(const PixelSeeds& seeds, int image_height, int image_width,
                          const NodeGrid& grid, int num_classes);

/// Dense N x K score map with seed confidences at seeded entries, 0 elsewhere.
ScoreMap rasterize_seeds(const SparseSeeds& seeds, const NodeGrid& grid, int num_classes);

/// 3x3 local linear layer over the K score channels with a logistic output.
/// weights are window-major per class: weights[k*9 + (dy+1)*3 + (dx+1)].
struct ImportanceHead {
  int num_classes = 0;
  Vector weights;  // num_classes * 9
  double bias = 0.0;
};

ImportanceHead zero_head(int num_classes);

/// Diagonal of the importance matrix; every value in (0, 1).
struct ImportanceMap {
  NodeGrid grid;
  Vector values;
};

/// Per-node sum of absolute scores.
struct InfluenceMap {
  NodeGrid grid;
  Vector values;
};

/// M_ii = logistic of the 3x3 neighborhood response of the head on x,
/// with edge replication at grid borders.
ImportanceMap importance(const ScoreMap& x, const ImportanceHead& head);

/// s = Mx: row i of x scaled by M_ii.
ScoreMap make_seed(const ScoreMap& x, const ImportanceMap& M);

InfluenceMap influence(const ScoreMap& x);

}  // namespace diffseg
