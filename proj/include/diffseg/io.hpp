#pragma once

#include "diffseg/seed.hpp"
#include "diffseg/types.hpp"

namespace diffseg {

/// Binary PPM (P6, three channels) or PGM (P5, one channel) with maxval 255.
/// Bytes scale to [0, 1] on read; the round trip is bit-exact.
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

/// PGM whose raw byte values are class ids (255 = ignore); not rescaled.
LabelMap read_label_map(const std::string& path, int downsample = 1);
void write_label_map(const LabelMap& labels, const std::string& path);

/// Text seeds at image resolution, one `row,col,class,confidence` line per
/// entry; `#` starts a comment.
PixelSeeds read_seeds_text(const std::string& path);
void write_seeds_text(const PixelSeeds& seeds, const std::string& path);

/// Scribble mask: PGM byte = class id, 255 = unseeded, confidence 1 each.
PixelSeeds read_scribble(const std::string& path);

/// Dispatches on extension: .pgm reads a scribble mask, anything else text.
PixelSeeds read_seeds(const std::string& path);

/// Min-max normalizes to 0..255 and writes a PGM. A constant grid maps to 0.
void encode_heatmap(const Matrix& values, const std::string& path);

/// Whole-file atomic write via a temp file and rename.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace diffseg
