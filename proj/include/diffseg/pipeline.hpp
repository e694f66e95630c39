#pragma once

#include "diffseg/diffusion.hpp"
#include "diffseg/manifest.hpp"
#include "diffseg/metrics.hpp"

namespace diffseg {

struct SegmentResult {
  NodeGrid grid;
  FeaturePyramid pyramid;
  std::vector<TransitionMatrix> transitions;
  ScoreMap scores;            // x, the rasterized seeds
  ImportanceMap importance_map;
  ScoreMap seed;              // s = Mx
  CascadeState state;
  LabelMap labels;            // argmax of the final scores
  PhaseTimings timings;
};

/// Full pipeline from a pyramid: transitions, seed branch, cascade, labels.
SegmentResult run_segmentation(FeaturePyramid pyramid, const PixelSeeds& seeds,
                               const CascadeParams& params, const ImportanceHead& head,
                               const EngineConfig& cfg, bool keep_trace = false);

/// Same, extracting the pyramid from the image first (timed as the feature
/// phase).
SegmentResult run_segmentation(const Image& image, const PixelSeeds& seeds,
                               const CascadeParams& params, const ImportanceHead& head,
                               const EngineConfig& cfg, bool keep_trace = false);

}  // namespace diffseg
