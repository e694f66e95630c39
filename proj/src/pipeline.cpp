#include "diffseg/pipeline.hpp"

#include <chrono>

namespace diffseg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SegmentResult run_segmentation(FeaturePyramid pyramid, const PixelSeeds& seeds,
                               const CascadeParams& params, const ImportanceHead& head,
                               const EngineConfig& cfg, bool keep_trace) {
  require_valid(cfg);
  if (pyramid.levels.empty())
    throw std::invalid_argument("run_segmentation: empty feature pyramid");

  SegmentResult result;
  const int image_height = pyramid.levels[0].grid_height;
  const int image_width = pyramid.levels[0].grid_width;
  result.grid = make_grid(image_height, image_width, cfg.downsample_factor);

  auto start = Clock::now();
  const auto projections = default_projections(pyramid, cfg);
  result.transitions = build_transitions(pyramid, projections, result.grid, cfg);
  result.timings.similarity_s = seconds_since(start);

  start = Clock::now();
  const SparseSeeds node_seeds =
      to_node_seeds(seeds, image_height, image_width, result.grid, cfg.num_classes);
  result.scores = rasterize_seeds(node_seeds, result.grid, cfg.num_classes);
  result.importance_map = importance(result.scores, head);
  result.seed = make_seed(result.scores, result.importance_map);
  result.timings.seed_s = seconds_since(start);

  start = Clock::now();
  result.state = run_cascade(result.seed, result.transitions, params, cfg, keep_trace);
  result.timings.diffusion_s = seconds_since(start);

  result.labels = argmax_labels(result.state.current);
  result.pyramid = std::move(pyramid);
  return result;
}

SegmentResult run_segmentation(const Image& image, const PixelSeeds& seeds,
                               const CascadeParams& params, const ImportanceHead& head,
                               const EngineConfig& cfg, bool keep_trace) {
  const auto start = Clock::now();
  FeaturePyramid pyramid = extract_pyramid(image, cfg);
  const double feature_s = seconds_since(start);
  SegmentResult result =
      run_segmentation(std::move(pyramid), seeds, params, head, cfg, keep_trace);
  result.timings.feature_s = feature_s;
  return result;
}

}  // namespace diffseg
