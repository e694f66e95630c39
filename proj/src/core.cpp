#include "diffseg/types.hpp"

#include <numeric>

namespace diffseg {

void check_image(const Image& img) {
  if (img.channels < 1 || img.height < 1 || img.width < 1)
    throw std::invalid_argument("image: channels, height and width must be positive");
  const size_t expected =
      static_cast<size_t>(img.channels) * img.height * img.width;
  if (img.data.size() != expected)
    throw std::invalid_argument("image: data has " + std::to_string(img.data.size()) +
                                " values, expected " + std::to_string(expected));
  for (double v : img.data)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::invalid_argument("image: values must be finite and in [0,1]");
}

std::vector<std::string> validate_config(const EngineConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.num_stages < 1) errors.push_back("num_stages: must be >= 1");
  if (cfg.embed_dim < 1) errors.push_back("embed_dim: must be >= 1");
  if (cfg.downsample_factor < 1) errors.push_back("downsample_factor: must be >= 1");
  if (!(cfg.softmax_temperature > 0.0) || !std::isfinite(cfg.softmax_temperature))
    errors.push_back("softmax_temperature: must be finite and > 0");
  if (!(cfg.standardize_epsilon > 0.0) || !std::isfinite(cfg.standardize_epsilon))
    errors.push_back("standardize_epsilon: must be finite and > 0");
  if (cfg.num_classes < 1) errors.push_back("num_classes: must be >= 1");
  for (int stage : cfg.skip_stages)
    if (stage < 1 || stage > cfg.num_stages)
      errors.push_back("skip_stages: stage " + std::to_string(stage) + " outside 1.." +
                       std::to_string(cfg.num_stages));
  return errors;
}

const EngineConfig& require_valid(const EngineConfig& cfg) {
  const auto errors = validate_config(cfg);
  if (!errors.empty()) {
    std::string joined = "invalid config: ";
    for (size_t i = 0; i < errors.size(); ++i) {
      if (i) joined += "; ";
      joined += errors[i];
    }
    throw std::invalid_argument(joined);
  }
  return cfg;
}

}  // namespace diffseg
