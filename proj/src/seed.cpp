#include "diffseg/seed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace diffseg {

namespace {
int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

SparseSeeds to_node_seeds(const PixelSeeds& seeds, int image_height, int image_width,
                          const NodeGrid& grid, int num_classes) {
  const int rho = grid.downsample;
  // accumulated confidence per (node, class)
  Matrix votes = Matrix::Zero(grid.count(), num_classes);
  for (const PixelSeedEntry& e : seeds.entries) {
    if (e.row < 0 || e.row >= image_height || e.col < 0 || e.col >= image_width)
      throw std::invalid_argument("seeds: pixel (" + std::to_string(e.row) + "," +
                                  std::to_string(e.col) + ") outside " +
                                  std::to_string(image_height) + "x" +
                                  std::to_string(image_width) + " image");
    if (e.label < 0 || e.label >= num_classes)
      throw std::invalid_argument("seeds: class " + std::to_string(e.label) +
                                  " outside 0.." + std::to_string(num_classes - 1));
    if (!(e.confidence > 0.0) || !std::isfinite(e.confidence))
      throw std::invalid_argument("seeds: confidence must be finite and > 0");
    votes(node_index(e.row / rho, e.col / rho, grid), e.label) += e.confidence;
  }
  SparseSeeds out;
  for (int node = 0; node < grid.count(); ++node) {
    int winner = -1;
    double best = 0.0;
    for (int k = 0; k < num_classes; ++k)
      if (votes(node, k) > best) {  // ties keep the lower class index
        best = votes(node, k);
        winner = k;
      }
    if (winner >= 0) out.entries.push_back({node, winner, best});
  }
  return out;
}

ScoreMap rasterize_seeds(const SparseSeeds& seeds, const NodeGrid& grid, int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("rasterize_seeds: need at least one class");
  ScoreMap x{grid, Matrix::Zero(grid.count(), num_classes)};
  std::vector<char> taken(static_cast<size_t>(grid.count()) * num_classes, 0);
  for (const SeedEntry& e : seeds.entries) {
    if (e.node < 0 || e.node >= grid.count())
      throw std::out_of_range("rasterize_seeds: node " + std::to_string(e.node) +
                              " outside 0.." + std::to_string(grid.count() - 1));
    if (e.label < 0 || e.label >= num_classes)
      throw std::invalid_argument("rasterize_seeds: class " + std::to_string(e.label) +
                                  " outside 0.." + std::to_string(num_classes - 1));
    if (!(e.confidence > 0.0) || !std::isfinite(e.confidence))
      throw std::invalid_argument("rasterize_seeds: confidence must be finite and > 0");
    char& slot = taken[static_cast<size_t>(e.node) * num_classes + e.label];
    if (slot)
      throw std::invalid_argument("rasterize_seeds: duplicate seed for node " +
                                  std::to_string(e.node) + ", class " +
                                  std::to_string(e.label));
    slot = 1;
    x.values(e.node, e.label) = e.confidence;
  }
  return x;
}

ImportanceHead zero_head(int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("zero_head: need at least one class");
  return ImportanceHead{num_classes, Vector::Zero(9 * num_classes), 0.0};
}

ImportanceMap importance(const ScoreMap& x, const ImportanceHead& head) {
  if (head.num_classes != x.classes())
    throw std::invalid_argument("importance: head expects " + std::to_string(head.num_classes) +
                                " classes, scores have " + std::to_string(x.classes()));
  if (head.weights.size() != 9 * head.num_classes)
    throw std::invalid_argument("importance: head weight count must be 9 * classes");
  if (!head.weights.allFinite() || !std::isfinite(head.bias))
    throw std::invalid_argument("importance: head parameters must be finite");
  const NodeGrid& grid = x.grid;
  ImportanceMap M{grid, Vector(grid.count())};
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) {
      double z = head.bias;
      for (int k = 0; k < head.num_classes; ++k)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int rr = clampi(r + dy, 0, grid.height - 1);
            const int cc = clampi(c + dx, 0, grid.width - 1);
            z += head.weights[k * 9 + (dy + 1) * 3 + (dx + 1)] *
                 x.values(rr * grid.width + cc, k);
          }
      M.values[r * grid.width + c] = logistic(z);
    }
  return M;
}

ScoreMap make_seed(const ScoreMap& x, const ImportanceMap& M) {
  if (!x.grid.same_shape(M.grid))
    throw std::invalid_argument("make_seed: score grid " + std::to_string(x.grid.height) + "x" +
                                std::to_string(x.grid.width) + " != importance grid " +
                                std::to_string(M.grid.height) + "x" +
                                std::to_string(M.grid.width));
  ScoreMap s{x.grid, Matrix(x.values.rows(), x.values.cols())};
  s.values = x.values.array().colwise() * M.values.array();
  return s;
}

InfluenceMap influence(const ScoreMap& x) {
  return InfluenceMap{x.grid, x.values.cwiseAbs().rowwise().sum()};
}

}  // namespace diffseg
