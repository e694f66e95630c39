#include "diffseg/manifest.hpp"

#include "diffseg/io.hpp"
#include "bytes.hpp"

#include <cmath>

namespace diffseg {

namespace {

std::string fmt_time(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", seconds);
  return buf;
}

}  // namespace

std::string format_manifest(const RunManifest& m) {
  for (double t : {m.timings.feature_s, m.timings.similarity_s, m.timings.seed_s,
                   m.timings.diffusion_s})
    if (!(t >= 0.0)) throw std::invalid_argument("manifest: timings must be >= 0");
  if (m.mu.size() != m.beta.size())
    throw std::invalid_argument("manifest: mu/beta counts differ");
  for (size_t t = 0; t < m.mu.size(); ++t)
    if (!(m.mu[t] > 0.0 && m.mu[t] < 1.0 && m.beta[t] > 0.0 && m.beta[t] < 1.0))
      throw std::invalid_argument("manifest: stage " + std::to_string(t + 1) +
                                  " parameters must lie in (0,1)");

  std::string out;
  out += "config.num_stages=" + std::to_string(m.config.num_stages) + "\n";
  out += "config.embed_dim=" + std::to_string(m.config.embed_dim) + "\n";
  out += "config.downsample_factor=" + std::to_string(m.config.downsample_factor) + "\n";
  out += std::string("config.affinity_scale=") + (m.config.affinity_scale ? "1" : "0") + "\n";
  out += "config.softmax_temperature=" + detail::fmt_g17(m.config.softmax_temperature) + "\n";
  out += "config.standardize_epsilon=" + detail::fmt_g17(m.config.standardize_epsilon) + "\n";
  out += std::string("config.pooling=") +
         (m.config.pooling == PoolMode::kAverage ? "average" : "max") + "\n";
  out += "config.num_classes=" + std::to_string(m.config.num_classes) + "\n";
  out += "config.skip_stages=";
  bool first = true;
  for (int stage : m.config.skip_stages) {
    if (!first) out += ",";
    out += std::to_string(stage);
    first = false;
  }
  out += "\n";
  out += "input.image=" + m.image_path + "\n";
  out += "input.seeds=" + m.seeds_path + "\n";
  out += "input.params=" + m.params_path + "\n";
  for (size_t t = 0; t < m.mu.size(); ++t) {
    out += "stage." + std::to_string(t + 1) + ".mu=" + detail::fmt_g17(m.mu[t]) + "\n";
    out += "stage." + std::to_string(t + 1) + ".beta=" + detail::fmt_g17(m.beta[t]) + "\n";
  }
  out += "time.feature_s=" + fmt_time(m.timings.feature_s) + "\n";
  out += "time.similarity_s=" + fmt_time(m.timings.similarity_s) + "\n";
  out += "time.seed_s=" + fmt_time(m.timings.seed_s) + "\n";
  out += "time.diffusion_s=" + fmt_time(m.timings.diffusion_s) + "\n";
  for (size_t i = 0; i < m.output_paths.size(); ++i)
    out += "output." + std::to_string(i) + "=" + m.output_paths[i] + "\n";
  return out;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  write_file_atomic(path, format_manifest(m));
}

}  // namespace diffseg
