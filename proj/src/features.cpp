#include "diffseg/features.hpp"

#include "diffseg/io.hpp"
#include "bytes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace diffseg {

namespace {

constexpr int kMinImageExtent = 15;  // widest descriptor window
constexpr int kNumClusters = 8;
constexpr int kLloydIterations = 10;

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint64_t image_checksum(const Image& img) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  auto mix_u64 = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
  };
  mix_u64(static_cast<uint64_t>(img.channels));
  mix_u64(static_cast<uint64_t>(img.height));
  mix_u64(static_cast<uint64_t>(img.width));
  for (double v : img.data) mix_u64(std::bit_cast<uint64_t>(v));
  return h;
}

// Level 0: raw channels plus normalized (row/h, col/w) coordinates.
FeatureMap color_position_level(const Image& img) {
  const int h = img.height, w = img.width, c = img.channels;
  FeatureMap fm{0, c + 2, h, w, Matrix(c + 2, h * w)};
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      const int p = r * w + col;
      for (int ch = 0; ch < c; ++ch) fm.data(ch, p) = img.at(ch, r, col);
      fm.data(c, p) = static_cast<double>(r) / h;
      fm.data(c + 1, p) = static_cast<double>(col) / w;
    }
  return fm;
}

// Level 1: 3x3 local mean and standard deviation per channel.
FeatureMap local_stats_level(const Image& img) {
  const int h = img.height, w = img.width, c = img.channels;
  FeatureMap fm{1, 2 * c, h, w, Matrix(2 * c, h * w)};
  for (int ch = 0; ch < c; ++ch)
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col) {
        double sum = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            sum += img.at(ch, clampi(r + dy, 0, h - 1), clampi(col + dx, 0, w - 1));
        const double mean = sum / 9.0;
        double var = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const double d =
                img.at(ch, clampi(r + dy, 0, h - 1), clampi(col + dx, 0, w - 1)) - mean;
            var += d * d;
          }
        const int p = r * w + col;
        fm.data(ch, p) = mean;
        fm.data(c + ch, p) = std::sqrt(var / 9.0);
      }
  return fm;
}

// Level 2: gradient magnitude plus a 4-bin orientation histogram over a
// 7x7 window. Gradients are central differences of the channel mean.
FeatureMap gradient_level(const Image& img) {
  const int h = img.height, w = img.width, c = img.channels;
  Matrix lum(h, w);
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      double sum = 0.0;
      for (int ch = 0; ch < c; ++ch) sum += img.at(ch, r, col);
      lum(r, col) = sum / c;
    }
  Matrix mag(h, w);
  Eigen::MatrixXi bin(h, w);
  constexpr double kPi = 3.14159265358979323846;
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      const double gx =
          (lum(r, clampi(col + 1, 0, w - 1)) - lum(r, clampi(col - 1, 0, w - 1))) / 2.0;
      const double gy =
          (lum(clampi(r + 1, 0, h - 1), col) - lum(clampi(r - 1, 0, h - 1), col)) / 2.0;
      mag(r, col) = std::sqrt(gx * gx + gy * gy);
      double theta = std::atan2(gy, gx);  // unsigned orientation in [0, pi)
      if (theta < 0.0) theta += kPi;
      if (theta >= kPi) theta -= kPi;
      bin(r, col) = clampi(static_cast<int>(theta / (kPi / 4.0)), 0, 3);
    }
  FeatureMap fm{2, 5, h, w, Matrix::Zero(5, h * w)};
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      const int p = r * w + col;
      fm.data(0, p) = mag(r, col);
      double hist[4] = {0.0, 0.0, 0.0, 0.0};
      for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
          const int rr = clampi(r + dy, 0, h - 1);
          const int cc = clampi(col + dx, 0, w - 1);
          hist[bin(rr, cc)] += mag(rr, cc);
        }
      for (int b = 0; b < 4; ++b) fm.data(1 + b, p) = hist[b] / 49.0;
    }
  return fm;
}

// Level 3: per-channel box average over a 15x15 window.
FeatureMap box_average_level(const Image& img) {
  const int h = img.height, w = img.width, c = img.channels;
  FeatureMap fm{3, c, h, w, Matrix(c, h * w)};
  for (int ch = 0; ch < c; ++ch)
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col) {
        double sum = 0.0;
        for (int dy = -7; dy <= 7; ++dy)
          for (int dx = -7; dx <= 7; ++dx)
            sum += img.at(ch, clampi(r + dy, 0, h - 1), clampi(col + dx, 0, w - 1));
        fm.data(ch, r * w + col) = sum / 225.0;
      }
  return fm;
}

// Cluster feature per pixel: channels plus position scaled by the longer
// image side, so positional distances stay isotropic in pixels.
Matrix cluster_features(const Image& img) {
  const int h = img.height, w = img.width, c = img.channels;
  const double side = static_cast<double>(std::max(h, w));
  Matrix X(c + 2, h * w);
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      const int p = r * w + col;
      for (int ch = 0; ch < c; ++ch) X(ch, p) = img.at(ch, r, col);
      X(c, p) = static_cast<double>(r) / side;
      X(c + 1, p) = static_cast<double>(col) / side;
    }
  return X;
}

double sq_distance(const Matrix& X, int p, const Matrix& C, int j) {
  double d = 0.0;
  for (int i = 0; i < X.rows(); ++i) {
    const double diff = X(i, p) - C(i, j);
    d += diff * diff;
  }
  return d;
}

// k-means++ seeding followed by a fixed number of Lloyd iterations. Scalar
// loops throughout so the arithmetic order is fully pinned down.
Matrix fit_clusters(const Matrix& X, int k, uint64_t seed, int iterations) {
  const int P = static_cast<int>(X.cols());
  std::mt19937_64 rng(seed);
  Matrix C(X.rows(), k);
  std::vector<char> chosen(P, 0);

  const int first = static_cast<int>(rng() % static_cast<uint64_t>(P));
  C.col(0) = X.col(first);
  chosen[first] = 1;

  std::vector<double> best(P);
  for (int p = 0; p < P; ++p) best[p] = sq_distance(X, p, C, 0);

  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (int p = 0; p < P; ++p) total += best[p];
    int pick = -1;
    if (total > 0.0) {
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      for (int p = 0; p < P; ++p) {
        acc += best[p];
        if (acc >= r) {
          pick = p;
          break;
        }
      }
      if (pick < 0) pick = P - 1;
    } else {
      // All remaining mass is zero (duplicate points); take the first
      // unchosen pixel.
      for (int p = 0; p < P && pick < 0; ++p)
        if (!chosen[p]) pick = p;
      if (pick < 0) pick = 0;
    }
    C.col(j) = X.col(pick);
    chosen[pick] = 1;
    for (int p = 0; p < P; ++p) best[p] = std::min(best[p], sq_distance(X, p, C, j));
  }

  std::vector<int> assign(P, 0);
  for (int it = 0; it < iterations; ++it) {
    for (int p = 0; p < P; ++p) {
      int arg = 0;
      double bestd = sq_distance(X, p, C, 0);
      for (int j = 1; j < k; ++j) {
        const double d = sq_distance(X, p, C, j);
        if (d < bestd) {
          bestd = d;
          arg = j;
        }
      }
      assign[p] = arg;
    }
    Matrix sums = Matrix::Zero(X.rows(), k);
    std::vector<int> counts(k, 0);
    for (int p = 0; p < P; ++p) {
      sums.col(assign[p]) += X.col(p);
      ++counts[assign[p]];
    }
    for (int j = 0; j < k; ++j)
      if (counts[j] > 0) C.col(j) = sums.col(j) / counts[j];  // empty keeps previous
  }
  return C;
}

// Level 4: soft assignments to the fitted color-position clusters,
// softmax of negative squared distances at a per-image bandwidth.
FeatureMap cluster_level(const Image& img) {
  const int h = img.height, w = img.width;
  const int P = h * w;
  const Matrix X = cluster_features(img);
  const Matrix C = fit_clusters(X, kNumClusters, image_checksum(img), kLloydIterations);

  Matrix d2(kNumClusters, P);
  double mean_min = 0.0;
  for (int p = 0; p < P; ++p) {
    double minv = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kNumClusters; ++j) {
      d2(j, p) = sq_distance(X, p, C, j);
      minv = std::min(minv, d2(j, p));
    }
    mean_min += minv;
  }
  const double bandwidth = mean_min / P + 1e-12;

  FeatureMap fm{4, kNumClusters, h, w, Matrix(kNumClusters, P)};
  for (int p = 0; p < P; ++p) {
    double m = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < kNumClusters; ++j)
      m = std::max(m, -d2(j, p) / (2.0 * bandwidth));
    double sum = 0.0;
    for (int j = 0; j < kNumClusters; ++j) {
      fm.data(j, p) = std::exp(-d2(j, p) / (2.0 * bandwidth) - m);
      sum += fm.data(j, p);
    }
    for (int j = 0; j < kNumClusters; ++j) fm.data(j, p) /= sum;
  }
  return fm;
}

}  // namespace

FeaturePyramid extract_pyramid(const Image& image, const EngineConfig& cfg) {
  check_image(image);
  require_valid(cfg);
  if (cfg.num_stages != 5)
    throw std::invalid_argument("extract_pyramid: the built-in extractor produces exactly "
                                "5 levels, config asks for " + std::to_string(cfg.num_stages));
  if (image.height < kMinImageExtent || image.width < kMinImageExtent)
    throw std::invalid_argument("extract_pyramid: image " + std::to_string(image.height) +
                                "x" + std::to_string(image.width) +
                                " smaller than the widest descriptor window (" +
                                std::to_string(kMinImageExtent) + "x" +
                                std::to_string(kMinImageExtent) + ")");
  FeaturePyramid pyr;
  pyr.levels.push_back(color_position_level(image));
  pyr.levels.push_back(local_stats_level(image));
  pyr.levels.push_back(gradient_level(image));
  pyr.levels.push_back(box_average_level(image));
  pyr.levels.push_back(cluster_level(image));
  return pyr;
}

void save_pyramid(const FeaturePyramid& pyramid, const std::string& path) {
  std::string out = "FPYR";
  for (const FeatureMap& fm : pyramid.levels) {
    detail::put_u32le(out, static_cast<uint32_t>(fm.level));
    detail::put_u32le(out, static_cast<uint32_t>(fm.dim));
    detail::put_u32le(out, static_cast<uint32_t>(fm.grid_height));
    detail::put_u32le(out, static_cast<uint32_t>(fm.grid_width));
    for (int ch = 0; ch < fm.dim; ++ch)
      for (int p = 0; p < fm.grid_height * fm.grid_width; ++p)
        detail::put_f64le(out, fm.data(ch, p));
  }
  write_file_atomic(path, out);
}

FeaturePyramid load_pyramid(const std::string& path, const EngineConfig& cfg) {
  require_valid(cfg);
  const std::string bytes = read_file(path);
  detail::ByteReader in{bytes, path};
  in.expect_magic("FPYR", "pyramid magic");
  FeaturePyramid pyr;
  while (!in.at_end()) {
    FeatureMap fm;
    fm.level = static_cast<int>(in.u32le("level"));
    fm.dim = static_cast<int>(in.u32le("dim"));
    fm.grid_height = static_cast<int>(in.u32le("height"));
    fm.grid_width = static_cast<int>(in.u32le("width"));
    if (fm.dim < 1 || fm.grid_height < 1 || fm.grid_width < 1)
      throw std::runtime_error(path + ": level " + std::to_string(pyr.levels.size()) +
                               " header has non-positive dimensions");
    if (fm.level != static_cast<int>(pyr.levels.size()))
      throw std::runtime_error(path + ": level index " + std::to_string(fm.level) +
                               " out of order (expected " +
                               std::to_string(pyr.levels.size()) + ")");
    fm.data.resize(fm.dim, fm.grid_height * fm.grid_width);
    for (int ch = 0; ch < fm.dim; ++ch)
      for (int p = 0; p < fm.grid_height * fm.grid_width; ++p) {
        const double v = in.f64le("feature value");
        if (!std::isfinite(v))
          throw std::runtime_error(path + ": non-finite value in level " +
                                   std::to_string(fm.level));
        fm.data(ch, p) = v;
      }
    if (!pyr.levels.empty() && (fm.grid_height != pyr.levels[0].grid_height ||
                                fm.grid_width != pyr.levels[0].grid_width))
      throw std::runtime_error(path + ": level " + std::to_string(fm.level) +
                               " grid differs from level 0");
    pyr.levels.push_back(std::move(fm));
  }
  if (static_cast<int>(pyr.levels.size()) != cfg.num_stages)
    throw std::runtime_error(path + ": has " + std::to_string(pyr.levels.size()) +
                             " levels, config expects " + std::to_string(cfg.num_stages));
  return pyr;
}

}  // namespace diffseg
