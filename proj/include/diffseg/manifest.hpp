#pragma once

#include "diffseg/types.hpp"

#include <string>
#include <vector>

namespace diffseg {

struct PhaseTimings {
  double feature_s = 0.0;
  double similarity_s = 0.0;
  double seed_s = 0.0;
  double diffusion_s = 0.0;
};

/// Plain-text key=value record of one engine run: config snapshot, inputs,
/// effective per-stage parameters, per-phase timings, and outputs.
struct RunManifest {
  EngineConfig config;
  std::string image_path;
  std::string seeds_path;
  std::string params_path;
  std::vector<double> mu;    // effective values, one per stage
  std::vector<double> beta;
  PhaseTimings timings;
  std::vector<std::string> output_paths;
};

std::string format_manifest(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace diffseg
