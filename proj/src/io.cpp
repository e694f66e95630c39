#include "diffseg/io.hpp"

#include "bytes.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace diffseg {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) throw std::runtime_error(path + ": read failed");
  return buffer.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error(path + ": rename failed: " + ec.message());
}

namespace {

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  size_t payload = 0;  // offset of the first payload byte
};

PnmHeader parse_pnm(const std::string& bytes, const std::string& path, int channels) {
  if (bytes.size() < 2) throw std::runtime_error(path + ": not a PNM file");
  PnmHeader header;
  header.magic = bytes.substr(0, 2);
  const std::string wanted = channels == 3 ? "P6" : "P5";
  if (header.magic != wanted) {
    if (header.magic.size() == 2 && header.magic[0] == 'P' &&
        std::isdigit(static_cast<unsigned char>(header.magic[1])))
      throw std::runtime_error(path + ": unsupported PNM variant " + header.magic +
                               " (only binary " + wanted + " is accepted here)");
    throw std::runtime_error(path + ": bad magic, expected " + wanted);
  }
  size_t pos = 2;
  auto next_int = [&](const char* what) {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
      throw std::runtime_error(path + ": malformed header, expected " + std::string(what));
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 24) throw std::runtime_error(path + ": unreasonable " + std::string(what));
      ++pos;
    }
    return static_cast<int>(v);
  };
  header.width = next_int("width");
  header.height = next_int("height");
  const int maxval = next_int("maxval");
  if (header.width < 1 || header.height < 1)
    throw std::runtime_error(path + ": non-positive image size");
  if (maxval != 255)
    throw std::runtime_error(path + ": maxval " + std::to_string(maxval) +
                             " unsupported, expected 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw std::runtime_error(path + ": missing whitespace before payload");
  header.payload = pos + 1;

  const size_t expected =
      static_cast<size_t>(header.width) * header.height * channels;
  const size_t actual = bytes.size() - header.payload;
  if (actual != expected)
    throw std::runtime_error(path + ": expected " + std::to_string(expected) +
                             " payload bytes, found " + std::to_string(actual));
  return header;
}

std::string pnm_header_text(const char* magic, int width, int height) {
  return std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) +
         "\n255\n";
}

int quantize255(double v) {
  const long byte = std::lround(v * 255.0);
  return byte < 0 ? 0 : (byte > 255 ? 255 : static_cast<int>(byte));
}

}  // namespace

Image read_image(const std::string& path) {
  const std::string bytes = read_file(path);
  int channels = 1;
  if (bytes.size() >= 2 && bytes[1] == '6') channels = 3;
  const PnmHeader header = parse_pnm(bytes, path, channels);
  Image img = make_image(channels, header.height, header.width);
  size_t pos = header.payload;
  for (int r = 0; r < header.height; ++r)
    for (int c = 0; c < header.width; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img.at(ch, r, c) = static_cast<unsigned char>(bytes[pos++]) / 255.0;
  return img;
}

void write_image(const Image& img, const std::string& path) {
  check_image(img);
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument(path + ": only 1- or 3-channel images can be written");
  std::string out = pnm_header_text(img.channels == 3 ? "P6" : "P5", img.width, img.height);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      for (int ch = 0; ch < img.channels; ++ch)
        out.push_back(static_cast<char>(quantize255(img.at(ch, r, c))));
  write_file_atomic(path, out);
}

LabelMap read_label_map(const std::string& path, int downsample) {
  const std::string bytes = read_file(path);
  const PnmHeader header = parse_pnm(bytes, path, 1);
  LabelMap out{NodeGrid{header.height, header.width, downsample},
               Eigen::VectorXi(header.height * header.width)};
  for (int i = 0; i < out.labels.size(); ++i)
    out.labels[i] = static_cast<unsigned char>(bytes[header.payload + i]);
  return out;
}

void write_label_map(const LabelMap& labels, const std::string& path) {
  if (labels.labels.size() != labels.grid.count())
    throw std::invalid_argument(path + ": label count differs from grid size");
  std::string out = pnm_header_text("P5", labels.grid.width, labels.grid.height);
  for (int i = 0; i < labels.labels.size(); ++i) {
    const int v = labels.labels[i];
    if (v < 0 || v > 255)
      throw std::invalid_argument(path + ": label " + std::to_string(v) +
                                  " not representable in a byte");
    out.push_back(static_cast<char>(v));
  }
  write_file_atomic(path, out);
}

PixelSeeds read_seeds_text(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  PixelSeeds seeds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start])))
      ++start;
    if (start == line.size()) continue;

    std::istringstream fields(line.substr(start));
    PixelSeedEntry entry;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(fields >> entry.row >> c1 >> entry.col >> c2 >> entry.label >> c3 >>
          entry.confidence) ||
        c1 != ',' || c2 != ',' || c3 != ',' || (fields >> std::ws, !fields.eof()))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected row,col,class,confidence");
    seeds.entries.push_back(entry);
  }
  return seeds;
}

void write_seeds_text(const PixelSeeds& seeds, const std::string& path) {
  std::string out;
  for (const PixelSeedEntry& e : seeds.entries)
    out += std::to_string(e.row) + "," + std::to_string(e.col) + "," +
           std::to_string(e.label) + "," + detail::fmt_g17(e.confidence) + "\n";
  write_file_atomic(path, out);
}

PixelSeeds read_scribble(const std::string& path) {
  const LabelMap mask = read_label_map(path, 1);
  PixelSeeds seeds;
  for (int r = 0; r < mask.grid.height; ++r)
    for (int c = 0; c < mask.grid.width; ++c) {
      const int v = mask.labels[r * mask.grid.width + c];
      if (v != kIgnoreLabel) seeds.entries.push_back({r, c, v, 1.0});
    }
  return seeds;
}

PixelSeeds read_seeds(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0)
    return read_scribble(path);
  return read_seeds_text(path);
}

void encode_heatmap(const Matrix& values, const std::string& path) {
  if (values.rows() < 1 || values.cols() < 1)
    throw std::invalid_argument(path + ": empty heatmap");
  if (!values.allFinite()) throw std::invalid_argument(path + ": non-finite heatmap values");
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  std::string out = pnm_header_text("P5", static_cast<int>(values.cols()),
                                    static_cast<int>(values.rows()));
  for (int r = 0; r < values.rows(); ++r)
    for (int c = 0; c < values.cols(); ++c) {
      const int byte = hi == lo ? 0 : quantize255((values(r, c) - lo) / (hi - lo));
      out.push_back(static_cast<char>(byte));
    }
  write_file_atomic(path, out);
}

}  // namespace diffseg
