#include <fstream>

#include "doctest.h"
#include "dspose/config.hpp"
#include "dspose/error.hpp"
#include "temp_dir.hpp"

using namespace dspose;

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.sampling.mu1 == 0.1);
  CHECK(c.sampling.mu2 == 1.0);
  CHECK(c.sampling.window_scales == std::vector<double>{0.5, 1.0});
  CHECK(c.sampling.stride == 2.0);
  CHECK(c.train.lambda_d == 4.0);
  CHECK(c.train.learning_rate == 0.01);
  CHECK(c.train.decay_factor == 0.1);
  CHECK(c.train.momentum == 0.0);
  CHECK(c.inference.k == 3);
  CHECK(c.inference.lambda_h == 0.9);
  CHECK_FALSE(c.inference.background_competes);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing") {
  const RunConfig c = parse_run_config(
      "# comment\n"
      "mu2 = 1.5\n"
      "window_scales = 0.25, 0.5,1\n"
      "  epochs=7   # trailing comment\n"
      "\n"
      "background_competes = yes\n"
      "part_tower = 4@3x3+pool, 6@3x3/s2\n"
      "towers = part\n"
      "seed = 99\n");
  CHECK(c.sampling.mu2 == 1.5);
  CHECK(c.sampling.window_scales == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(c.train.epochs == 7);
  CHECK(c.inference.background_competes);
  CHECK(c.network.part_tower == std::vector<ConvLayerSpec>{{4, 3, 1, true}, {6, 3, 2, false}});
  CHECK(c.network.towers == TowerMode::part_only);
  CHECK(c.seed == 99);
  CHECK(c.sampling.seed == 99);
  CHECK(c.train.seed == 99);
  CHECK(c.figure.seed == 99);
}

TEST_CASE("text form round trips") {
  RunConfig c = parse_run_config("mu1 = 0.15\nlearning_rate = 0.003\nfully_connected = 32,16\nseed = 4\n");
  const RunConfig back = parse_run_config(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.sampling.mu1 == 0.15);
  CHECK(back.train.learning_rate == 0.003);
  CHECK(back.network == c.network);
}

TEST_CASE("rejections name the key") {
  try {
    parse_run_config("learning_rat = 0.1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rat") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_run_config("epochs = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("epochs 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("background_competes = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("part_tower = 4@3x5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("towers = all\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("mu1 = 2\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_run_config("k = 0\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_run_config("lambda_h = 1.5\n").validate(), ConfigError);
}

TEST_CASE("files") {
  test::TempDir dir;
  {
    std::ofstream(dir / "run.cfg") << "count = 12\n";
  }
  CHECK(load_run_config(dir / "run.cfg").count == 12);
  CHECK_THROWS_AS(load_run_config(dir / "absent.cfg"), ConfigError);
}

}
