#pragma once

#include "diffseg/types.hpp"

namespace diffseg {

/// One pyramid level at full image resolution. Columns are pixels in
/// row-major order, rows are descriptor channels.
struct FeatureMap {
  int level = 0;
  int dim = 0;
  int grid_height = 0;
  int grid_width = 0;
  Matrix data;  // dim x (grid_height * grid_width)
};

struct FeaturePyramid {
  std::vector<FeatureMap> levels;
};

/// Hand-crafted five-level pyramid: color + normalized position, 3x3 local
/// mean/stddev, gradient statistics over a 7x7 window, 15x15 box averages,
/// and soft assignments to 8 color-position clusters fitted on the image.
/// Deterministic, including the cluster initialization (seeded from an
/// image checksum).
FeaturePyramid extract_pyramid(const Image& image, const EngineConfig& cfg);

/// Binary pyramid container: magic "FPYR", then per level a header of
/// (level, dim, height, width) as u32 little-endian followed by
/// dim*height*width f64 little-endian values, channel-major.
void save_pyramid(const FeaturePyramid& pyramid, const std::string& path);
FeaturePyramid load_pyramid(const std::string& path, const EngineConfig& cfg);

}  // namespace diffseg
