#include "diffseg/similarity.hpp"

#include "diffseg/io.hpp"
#include "bytes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace diffseg {

namespace {

constexpr uint64_t kProjectionSeed = 0x9e3779b97f4a7c15ull;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

std::vector<Projection> default_projections(const FeaturePyramid& pyramid,
                                            const EngineConfig& cfg) {
  require_valid(cfg);
  std::vector<Projection> projections;
  projections.reserve(pyramid.levels.size());
  for (const FeatureMap& fm : pyramid.levels) {
    std::mt19937_64 rng(kProjectionSeed + static_cast<uint64_t>(fm.level));
    Projection proj;
    proj.level = fm.level;
    proj.weights.resize(cfg.embed_dim, fm.dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fm.dim));
    for (int i = 0; i < proj.weights.rows(); ++i)
      for (int j = 0; j < proj.weights.cols(); ++j)
        proj.weights(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    proj.bias = Vector::Zero(cfg.embed_dim);
    proj.epsilon = cfg.standardize_epsilon;
    proj.pool_factor = cfg.downsample_factor;
    proj.pooling = cfg.pooling;
    projections.push_back(std::move(proj));
  }
  return projections;
}

Matrix project(const FeatureMap& features, const Projection& proj, const NodeGrid& grid) {
  if (proj.weights.cols() != features.dim)
    throw std::invalid_argument("project: weights expect feature dim " +
                                std::to_string(proj.weights.cols()) + ", level " +
                                std::to_string(features.level) + " has " +
                                std::to_string(features.dim));
  if (proj.bias.size() != proj.weights.rows())
    throw std::invalid_argument("project: bias length does not match output dim");
  if (!(proj.epsilon > 0.0))
    throw std::invalid_argument("project: epsilon must be > 0");
  const int h = features.grid_height, w = features.grid_width;
  const NodeGrid expected = make_grid(h, w, proj.pool_factor);
  if (!grid.same_shape(expected))
    throw std::invalid_argument("project: grid " + std::to_string(grid.height) + "x" +
                                std::to_string(grid.width) + " inconsistent with " +
                                std::to_string(h) + "x" + std::to_string(w) +
                                " features at pool factor " +
                                std::to_string(proj.pool_factor));

  Matrix mapped = proj.weights * features.data;
  mapped.colwise() += proj.bias;

  // Per-channel standardization across all pixels. A constant channel has
  // no scale to standardize against and maps to exactly zero, the limit of
  // the (std + eps) convention.
  for (int ch = 0; ch < mapped.rows(); ++ch) {
    auto row = mapped.row(ch);
    if (row.maxCoeff() == row.minCoeff()) {
      row.setZero();
      continue;
    }
    const double mean = row.mean();
    const double sd = std::sqrt((row.array() - mean).square().mean());
    row = (row.array() - mean) / (sd + proj.epsilon);
  }

  const int rho = proj.pool_factor;
  Matrix embedding(mapped.rows(), grid.count());
  for (int nr = 0; nr < grid.height; ++nr)
    for (int nc = 0; nc < grid.width; ++nc) {
      const int node = nr * grid.width + nc;
      if (proj.pooling == PoolMode::kAverage) {
        Vector acc = Vector::Zero(mapped.rows());
        for (int dy = 0; dy < rho; ++dy)
          for (int dx = 0; dx < rho; ++dx) {
            const int r = clampi(nr * rho + dy, 0, h - 1);
            const int c = clampi(nc * rho + dx, 0, w - 1);
            acc += mapped.col(r * w + c);
          }
        embedding.col(node) = acc / static_cast<double>(rho * rho);
      } else {
        Vector acc = Vector::Constant(mapped.rows(), -std::numeric_limits<double>::infinity());
        for (int dy = 0; dy < rho; ++dy)
          for (int dx = 0; dx < rho; ++dx) {
            const int r = clampi(nr * rho + dy, 0, h - 1);
            const int c = clampi(nc * rho + dx, 0, w - 1);
            acc = acc.cwiseMax(mapped.col(r * w + c));
          }
        embedding.col(node) = acc;
      }
    }
  if (!embedding.allFinite())
    throw std::runtime_error("project: non-finite embedding values");
  return embedding;
}

AffinityMatrix affinity(const Matrix& embeddings, const EngineConfig& cfg) {
  if (!embeddings.allFinite())
    throw std::invalid_argument("affinity: embeddings must be finite");
  AffinityMatrix aff;
  aff.values = embeddings.transpose() * embeddings;
  if (cfg.affinity_scale)
    aff.values /= std::sqrt(static_cast<double>(embeddings.rows()));
  aff.degrees = aff.values.rowwise().sum();
  return aff;
}

TransitionMatrix row_softmax(const AffinityMatrix& aff, double temperature, int level) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("row_softmax: temperature must be finite and > 0");
  if (!aff.values.allFinite())
    throw std::invalid_argument("row_softmax: affinities must be finite");
  const int n = aff.size();
  TransitionMatrix P{Matrix(n, n), level};
  for (int i = 0; i < n; ++i) {
    const Vector scaled = aff.values.row(i).transpose() / temperature;
    const double shift = scaled.maxCoeff();
    Vector e = (scaled.array() - shift).exp();
    P.values.row(i) = (e / e.sum()).transpose();
  }
  return P;
}

std::vector<TransitionMatrix> build_transitions(const FeaturePyramid& pyramid,
                                                const std::vector<Projection>& projections,
                                                const NodeGrid& grid, const EngineConfig& cfg) {
  require_valid(cfg);
  if (static_cast<int>(pyramid.levels.size()) != cfg.num_stages)
    throw std::invalid_argument("build_transitions: pyramid has " +
                                std::to_string(pyramid.levels.size()) +
                                " levels, config expects " + std::to_string(cfg.num_stages));
  if (projections.size() != pyramid.levels.size())
    throw std::invalid_argument("build_transitions: need one projection per level");
  std::vector<TransitionMatrix> transitions;
  transitions.reserve(pyramid.levels.size());
  for (size_t t = 0; t < pyramid.levels.size(); ++t) {
    const Matrix embedding = project(pyramid.levels[t], projections[t], grid);
    transitions.push_back(
        row_softmax(affinity(embedding, cfg), cfg.softmax_temperature, static_cast<int>(t)));
  }
  return transitions;
}

Matrix transition_row(const TransitionMatrix& P, int node, const NodeGrid& grid) {
  if (grid.count() != P.size())
    throw std::invalid_argument("transition_row: grid has " + std::to_string(grid.count()) +
                                " nodes, matrix is " + std::to_string(P.size()) + "x" +
                                std::to_string(P.size()));
  if (node < 0 || node >= P.size())
    throw std::out_of_range("transition_row: node " + std::to_string(node) +
                            " outside 0.." + std::to_string(P.size() - 1));
  Matrix heat(grid.height, grid.width);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) heat(r, c) = P.values(node, r * grid.width + c);
  return heat;
}

void save_transition(const TransitionMatrix& P, const std::string& path) {
  std::string out = "TMAT";
  detail::put_u32le(out, static_cast<uint32_t>(P.size()));
  detail::put_u32le(out, static_cast<uint32_t>(P.level));
  for (int i = 0; i < P.size(); ++i)
    for (int j = 0; j < P.size(); ++j) detail::put_f64le(out, P.values(i, j));
  write_file_atomic(path, out);
}

TransitionMatrix load_transition(const std::string& path) {
  const std::string bytes = read_file(path);
  detail::ByteReader in{bytes, path};
  in.expect_magic("TMAT", "matrix magic");
  const int n = static_cast<int>(in.u32le("size"));
  const int level = static_cast<int>(in.u32le("level"));
  if (n < 1) throw std::runtime_error(path + ": non-positive matrix size");
  TransitionMatrix P{Matrix(n, n), level};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = in.f64le("matrix value");
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw std::runtime_error(path + ": entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") outside [0,1]");
      P.values(i, j) = v;
    }
  if (!in.at_end()) throw std::runtime_error(path + ": trailing bytes after matrix");
  for (int i = 0; i < n; ++i)
    if (std::abs(P.values.row(i).sum() - 1.0) > 1e-9)
      throw std::runtime_error(path + ": row " + std::to_string(i) + " does not sum to 1");
  return P;
}

}  // namespace diffseg
