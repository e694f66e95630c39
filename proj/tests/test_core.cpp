#include "diffseg/types.hpp"

#include "doctest.h"

using namespace diffseg;

TEST_SUITE("core") {
  TEST_CASE("node_index row-major arithmetic") {
    const NodeGrid grid{3, 4, 1};
    CHECK_EQ(node_index(0, 0, grid), 0);
    CHECK_EQ(node_index(1, 2, grid), 6);
    CHECK_EQ(node_index(2, 3, grid), 11);
  }

  TEST_CASE("node_index rejects out-of-range cells") {
    const NodeGrid grid{3, 4, 1};
    CHECK_THROWS_AS(node_index(3, 0, grid), std::out_of_range);
    CHECK_THROWS_AS(node_index(0, 4, grid), std::out_of_range);
    CHECK_THROWS_AS(node_index(-1, 0, grid), std::out_of_range);
  }

  TEST_CASE("node_index and node_cell are inverse on every cell") {
    for (const NodeGrid grid : {NodeGrid{1, 1, 1}, NodeGrid{3, 4, 1}, NodeGrid{7, 5, 2},
                                NodeGrid{64, 64, 5}}) {
      for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c) {
          const int node = node_index(r, c, grid);
          CHECK_EQ(node_cell(node, grid), std::pair{r, c});
        }
      CHECK_THROWS_AS(node_cell(grid.count(), grid), std::out_of_range);
    }
  }

  TEST_CASE("ceil-division grid sizing") {
    CHECK_EQ(make_grid(10, 10, 5).height, 2);
    CHECK_EQ(make_grid(11, 10, 5).height, 3);
    CHECK_EQ(make_grid(10, 11, 5).width, 3);
    CHECK_EQ(make_grid(1, 1, 5).count(), 1);
  }

  TEST_CASE("validate_config accepts the defaults") {
    CHECK(validate_config(EngineConfig{}).empty());
  }

  TEST_CASE("validate_config names each violated field") {
    EngineConfig cfg;
    cfg.num_stages = 0;
    auto errors = validate_config(cfg);
    REQUIRE_EQ(errors.size(), 1);
    CHECK(errors[0].find("num_stages") != std::string::npos);

    EngineConfig two;
    two.softmax_temperature = -1.0;
    two.downsample_factor = 0;
    errors = validate_config(two);
    REQUIRE_EQ(errors.size(), 2);
    CHECK((errors[0] + errors[1]).find("softmax_temperature") != std::string::npos);
    CHECK((errors[0] + errors[1]).find("downsample_factor") != std::string::npos);

    CHECK_THROWS_AS(require_valid(two), std::invalid_argument);
  }

  TEST_CASE("validate_config rejects skip stages outside 1..T") {
    EngineConfig cfg;
    cfg.skip_stages = {0};
    CHECK_EQ(validate_config(cfg).size(), 1);
    cfg.skip_stages = {2, 4};
    CHECK(validate_config(cfg).empty());
    cfg.skip_stages = {6};
    CHECK_EQ(validate_config(cfg).size(), 1);
  }

  TEST_CASE("check_image flags shape and range violations") {
    Image ok = make_image(1, 2, 2, 0.5);
    CHECK_NOTHROW(check_image(ok));
    Image bad_len = ok;
    bad_len.data.pop_back();
    CHECK_THROWS_AS(check_image(bad_len), std::invalid_argument);
    Image bad_range = ok;
    bad_range.data[0] = 1.5;
    CHECK_THROWS_AS(check_image(bad_range), std::invalid_argument);
    Image bad_nan = ok;
    bad_nan.data[0] = std::nan("");
    CHECK_THROWS_AS(check_image(bad_nan), std::invalid_argument);
  }

  TEST_CASE("logistic saturates exactly at extreme logits") {
    CHECK_EQ(logistic(0.0), 0.5);
    CHECK_EQ(logistic(800.0), 1.0);
    CHECK_EQ(logistic(-800.0), 0.0);
    CHECK(logistic(50.0) < 1.0 + 1e-9);
    CHECK(logistic(-50.0) > 0.0);
  }
}
