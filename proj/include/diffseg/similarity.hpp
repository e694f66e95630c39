#pragma once

#include "diffseg/features.hpp"
#include "diffseg/types.hpp"

namespace diffseg {

/// Per-level embedding head: affine map to the shared embedding dimension,
/// per-channel standardization over the whole image, then pooling down to
/// the node grid.
struct Projection {
  int level = 0;
  Matrix weights;  // embed_dim x feature_dim
  Vector bias;     // embed_dim
  double epsilon = 1e-5;
  int pool_factor = 5;
  PoolMode pooling = PoolMode::kAverage;
};

/// Symmetric pairwise similarities plus their row sums (the graph degrees).
struct AffinityMatrix {
  Matrix values;   // N x N
  Vector degrees;  // row sums

  int size() const { return static_cast<int>(values.rows()); }
};

/// Row-stochastic random-walk probabilities between nodes.
struct TransitionMatrix {
  Matrix values;  // N x N, every row sums to 1
  int level = 0;

  int size() const { return static_cast<int>(values.rows()); }
};

/// Reproducible default projections: weights uniform in
/// [-1/sqrt(d_t), +1/sqrt(d_t)] from a fixed seed, zero bias.
std::vector<Projection> default_projections(const FeaturePyramid& pyramid,
                                            const EngineConfig& cfg);

/// Embeds one feature level onto the node grid. Constant channels
/// standardize to exactly zero; ragged pooling borders replicate edges.
Matrix project(const FeatureMap& features, const Projection& proj, const NodeGrid& grid);

/// W = Z^T Z over embedding columns, optionally scaled by 1/sqrt(d).
AffinityMatrix affinity(const Matrix& embeddings, const EngineConfig& cfg);

/// Row-wise softmax of W / temperature, with the row maximum subtracted
/// before exponentiation.
TransitionMatrix row_softmax(const AffinityMatrix& aff, double temperature, int level = 0);

/// One transition matrix per pyramid level, in stage order.
std::vector<TransitionMatrix> build_transitions(const FeaturePyramid& pyramid,
                                                const std::vector<Projection>& projections,
                                                const NodeGrid& grid, const EngineConfig& cfg);

/// Row `node` of P laid out on the node grid as an h' x w' heat grid.
Matrix transition_row(const TransitionMatrix& P, int node, const NodeGrid& grid);

/// Binary matrix container: magic "TMAT", N and level as u32 little-endian,
/// then N*N f64 little-endian values, row-major.
void save_transition(const TransitionMatrix& P, const std::string& path);
TransitionMatrix load_transition(const std::string& path);

}  // namespace diffseg
