#include "diffseg/io.hpp"

#include "diffseg/features.hpp"
#include "diffseg/similarity.hpp"
#include "diffseg/train.hpp"
#include "doctest.h"
#include "testutil.hpp"

#include <cmath>
#include <filesystem>

using namespace diffseg;
using testutil::TempDir;

namespace {

const std::string kGolden = DIFFSEG_GOLDEN_DIR;

std::string golden(const std::string& name) { return kGolden + "/" + name; }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("PPM round trip is bit exact") {
    TempDir dir("ppm");
    std::mt19937_64 rng(1);
    const Image img = testutil::random_image(3, 5, 7, rng);
    const std::string a = dir.file("a.ppm"), b = dir.file("b.ppm");
    write_image(img, a);
    write_image(read_image(a), b);
    CHECK_EQ(read_file(a), read_file(b));
  }

  TEST_CASE("PGM round trip is bit exact") {
    TempDir dir("pgm");
    std::mt19937_64 rng(2);
    const Image img = testutil::random_image(1, 4, 9, rng);
    const std::string a = dir.file("a.pgm"), b = dir.file("b.pgm");
    write_image(img, a);
    write_image(read_image(a), b);
    CHECK_EQ(read_file(a), read_file(b));
  }

  TEST_CASE("ASCII PNM variants are rejected") {
    TempDir dir("p3");
    const std::string path = dir.file("a.ppm");
    write_file_atomic(path, "P3\n1 1\n255\n1 2 3\n");
    CHECK_THROWS_WITH_AS(read_image(path), doctest::Contains("unsupported"),
                         std::runtime_error);
  }

  TEST_CASE("truncated payloads name the expected and actual byte counts") {
    TempDir dir("trunc");
    const std::string path = dir.file("a.pgm");
    write_file_atomic(path, std::string("P5\n2 2\n255\n") + "ab");  // 2 of 4 bytes
    CHECK_THROWS_WITH_AS(read_image(path), doctest::Contains("expected 4"),
                         std::runtime_error);
    CHECK_THROWS_WITH(read_image(path), doctest::Contains("found 2"));
  }

  TEST_CASE("only maxval 255 is accepted") {
    TempDir dir("maxval");
    const std::string path = dir.file("a.pgm");
    write_file_atomic(path, std::string("P5\n1 1\n99\n") + "x");
    CHECK_THROWS_WITH_AS(read_image(path), doctest::Contains("maxval"), std::runtime_error);
  }

  TEST_CASE("header comments are allowed") {
    TempDir dir("comment");
    const std::string path = dir.file("a.pgm");
    write_file_atomic(path, std::string("P5\n# a comment\n2 1\n255\n") + "ab");
    const Image img = read_image(path);
    CHECK_EQ(img.width, 2);
    CHECK_EQ(img.height, 1);
    CHECK_EQ(img.at(0, 0, 0), static_cast<double>('a') / 255.0);
  }

  TEST_CASE("label maps store raw class bytes") {
    TempDir dir("labels");
    LabelMap labels{NodeGrid{2, 3, 5}, Eigen::VectorXi(6)};
    labels.labels << 0, 1, 254, 255, 3, 2;
    const std::string path = dir.file("l.pgm");
    write_label_map(labels, path);
    const LabelMap loaded = read_label_map(path, 5);
    CHECK_EQ(loaded.grid.height, 2);
    CHECK_EQ(loaded.grid.width, 3);
    CHECK_EQ(loaded.labels, labels.labels);
  }

  TEST_CASE("seed text files parse values and comments") {
    TempDir dir("seeds");
    const std::string path = dir.file("a.seeds");
    write_file_atomic(path,
                      "# image-resolution seeds\n"
                      "0,0,0,1\n"
                      "  3, 4, 1, 0.5  # trailing comment\n"
                      "\n"
                      "9,9,2,2.25\n");
    const PixelSeeds seeds = read_seeds_text(path);
    REQUIRE_EQ(seeds.entries.size(), 3);
    CHECK_EQ(seeds.entries[1].row, 3);
    CHECK_EQ(seeds.entries[1].col, 4);
    CHECK_EQ(seeds.entries[1].label, 1);
    CHECK_EQ(seeds.entries[1].confidence, 0.5);
  }

  TEST_CASE("malformed seed lines are rejected with their line number") {
    TempDir dir("seeds_bad");
    const std::string path = dir.file("bad.seeds");
    write_file_atomic(path, "0,0,0,1\n1,2,3\n");
    CHECK_THROWS_WITH_AS(read_seeds_text(path), doctest::Contains(":2"), std::runtime_error);
  }

  TEST_CASE("scribble masks become unit-confidence seeds") {
    TempDir dir("scribble");
    LabelMap mask{NodeGrid{2, 2, 1}, Eigen::VectorXi(4)};
    mask.labels << 1, 255, 255, 0;
    const std::string path = dir.file("mask.pgm");
    write_label_map(mask, path);
    const PixelSeeds seeds = read_seeds(path);  // .pgm dispatches to the scribble reader
    REQUIRE_EQ(seeds.entries.size(), 2);
    CHECK_EQ(seeds.entries[0].row, 0);
    CHECK_EQ(seeds.entries[0].col, 0);
    CHECK_EQ(seeds.entries[0].label, 1);
    CHECK_EQ(seeds.entries[1].row, 1);
    CHECK_EQ(seeds.entries[1].col, 1);
    CHECK_EQ(seeds.entries[1].label, 0);
  }

  TEST_CASE("heatmaps min-max normalize, constants map to zero") {
    TempDir dir("heatmap");
    SUBCASE("constant grid gives a zero payload") {
      const std::string path = dir.file("c.pgm");
      encode_heatmap(Matrix::Constant(2, 2, 5.0), path);
      const std::string bytes = read_file(path);
      const std::string payload = bytes.substr(bytes.size() - 4);
      CHECK_EQ(payload, std::string(4, '\0'));
    }
    SUBCASE("two-value grid maps to 0 and 255") {
      const std::string path = dir.file("two.pgm");
      Matrix grid(1, 2);
      grid << 1.0, 3.0;
      encode_heatmap(grid, path);
      const std::string bytes = read_file(path);
      CHECK_EQ(static_cast<unsigned char>(bytes[bytes.size() - 2]), 0);
      CHECK_EQ(static_cast<unsigned char>(bytes[bytes.size() - 1]), 255);
    }
    SUBCASE("decoding reproduces the 8-bit quantization exactly") {
      std::mt19937_64 rng(3);
      const Matrix grid = testutil::random_matrix(4, 5, rng, -2.0, 7.0);
      const std::string path = dir.file("q.pgm");
      encode_heatmap(grid, path);
      const Image decoded = read_image(path);
      const double lo = grid.minCoeff(), hi = grid.maxCoeff();
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 5; ++c) {
          const long expected = std::lround((grid(r, c) - lo) / (hi - lo) * 255.0);
          CHECK_EQ(std::lround(decoded.at(0, r, c) * 255.0), expected);
        }
    }
  }

  TEST_CASE("atomic writes replace the target and leave no temp file") {
    TempDir dir("atomic");
    const std::string path = dir.file("x.txt");
    write_file_atomic(path, "one");
    write_file_atomic(path, "two");
    CHECK_EQ(read_file(path), "two");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  }

  TEST_CASE("golden PPM decodes to the frozen pixels and re-encodes bit-exactly") {
    TempDir dir("golden_ppm");
    const Image img = read_image(golden("golden.ppm"));
    CHECK_EQ(img.channels, 3);
    CHECK_EQ(img.height, 2);
    CHECK_EQ(img.width, 2);
    CHECK_EQ(img.at(0, 0, 0), 10.0 / 255.0);
    CHECK_EQ(img.at(2, 1, 1), 120.0 / 255.0);
    write_image(img, dir.file("copy.ppm"));
    CHECK_EQ(read_file(dir.file("copy.ppm")), read_file(golden("golden.ppm")));
  }

  TEST_CASE("golden PGM decodes to the frozen pixels and re-encodes bit-exactly") {
    TempDir dir("golden_pgm");
    const Image img = read_image(golden("golden.pgm"));
    CHECK_EQ(img.channels, 1);
    CHECK_EQ(img.height, 2);
    CHECK_EQ(img.width, 3);
    CHECK_EQ(img.at(0, 0, 1), 128.0 / 255.0);
    CHECK_EQ(img.at(0, 1, 2), 31.0 / 255.0);
    write_image(img, dir.file("copy.pgm"));
    CHECK_EQ(read_file(dir.file("copy.pgm")), read_file(golden("golden.pgm")));
  }

  TEST_CASE("golden pyramid decodes to the frozen values and re-encodes bit-exactly") {
    TempDir dir("golden_fpyr");
    EngineConfig cfg;
    cfg.num_stages = 2;
    const FeaturePyramid pyr = load_pyramid(golden("golden.fpyr"), cfg);
    REQUIRE_EQ(pyr.levels.size(), 2);
    CHECK_EQ(pyr.levels[0].dim, 1);
    CHECK_EQ(pyr.levels[0].data(0, 0), 0.5);
    CHECK_EQ(pyr.levels[0].data(0, 1), -1.25);
    CHECK_EQ(pyr.levels[0].data(0, 3), 0.0625);
    CHECK_EQ(pyr.levels[1].dim, 2);
    CHECK_EQ(pyr.levels[1].data(1, 3), 16.0);
    save_pyramid(pyr, dir.file("copy.fpyr"));
    CHECK_EQ(read_file(dir.file("copy.fpyr")), read_file(golden("golden.fpyr")));
  }

  TEST_CASE("golden transition decodes to the frozen values and re-encodes bit-exactly") {
    TempDir dir("golden_tmat");
    const TransitionMatrix P = load_transition(golden("golden.tmat"));
    CHECK_EQ(P.size(), 2);
    CHECK_EQ(P.level, 1);
    CHECK_EQ(P.values(0, 0), 0.25);
    CHECK_EQ(P.values(0, 1), 0.75);
    CHECK_EQ(P.values(1, 0), 0.5);
    save_transition(P, dir.file("copy.tmat"));
    CHECK_EQ(read_file(dir.file("copy.tmat")), read_file(golden("golden.tmat")));
  }

  TEST_CASE("golden parameter file decodes and re-encodes bit-exactly") {
    TempDir dir("golden_params");
    const auto [params, head] = load_params(golden("golden.params.txt"));
    REQUIRE_EQ(params.stages(), 2);
    CHECK_EQ(params.mu_logits[0], 0.25);
    CHECK_EQ(params.mu_logits[1], -1.5);
    CHECK_EQ(params.beta_logits[0], 3.0);
    CHECK_EQ(params.beta_logits[1], -50.0);
    CHECK_EQ(head.num_classes, 1);
    CHECK_EQ(head.weights[6], 0.125);
    CHECK_EQ(head.bias, 0.0625);
    save_params(params, head, dir.file("copy.txt"));
    CHECK_EQ(read_file(dir.file("copy.txt")), read_file(golden("golden.params.txt")));
  }

  TEST_CASE("golden seed file decodes and re-encodes bit-exactly") {
    TempDir dir("golden_seeds");
    const PixelSeeds seeds = read_seeds(golden("golden.seeds"));
    REQUIRE_EQ(seeds.entries.size(), 3);
    CHECK_EQ(seeds.entries[2].row, 7);
    CHECK_EQ(seeds.entries[2].col, 5);
    CHECK_EQ(seeds.entries[2].label, 2);
    CHECK_EQ(seeds.entries[2].confidence, 2.25);
    write_seeds_text(seeds, dir.file("copy.seeds"));
    CHECK_EQ(read_file(dir.file("copy.seeds")), read_file(golden("golden.seeds")));
  }
}
