#include <cstring>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dspose/checkpoint.hpp"
#include "dspose/error.hpp"
#include "temp_dir.hpp"

using namespace dspose;

TEST_SUITE("checkpoint") {

TEST_CASE("round trip is bit-exact") {
  test::TempDir dir;
  Checkpoint ck{init_params(LayerSpec::desk_default(14, TowerMode::body_only), 9), {}};
  // Values that decimal text would mangle.
  ck.params.values()[0] = 0.1 + 0.2;
  ck.params.values()[1] = -0.0;
  ck.params.values()[2] = std::numeric_limits<double>::denorm_min();
  ck.state.epochs_completed = 7;
  ck.state.velocity.assign(ck.params.size(), 1.0 / 3.0);
  save_checkpoint(dir / "a.ckpt", ck);
  const Checkpoint back = load_checkpoint(dir / "a.ckpt");
  CHECK(back.params.spec() == ck.params.spec());
  CHECK(back.state == ck.state);
  REQUIRE(back.params.size() == ck.params.size());
  CHECK(std::memcmp(back.params.values().data(), ck.params.values().data(),
                    ck.params.size() * sizeof(double)) == 0);
}

TEST_CASE("layer spec JSON round trip") {
  for (const LayerSpec& spec : {LayerSpec::desk_default(10), LayerSpec::krizhevsky_shape(14),
                                LayerSpec::desk_default(14, TowerMode::part_only)}) {
    CHECK(layer_spec_from_json(layer_spec_to_json(spec)) == spec);
  }
}

TEST_CASE("corrupt files are rejected") {
  test::TempDir dir;
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
  {
    std::ofstream(dir / "junk.ckpt") << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), IoError);

  Checkpoint ck{init_params(LayerSpec::desk_default(3), 1), {}};
  save_checkpoint(dir / "ok.ckpt", ck);
  std::ifstream in(dir / "ok.ckpt", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  bytes.resize(bytes.size() / 2);
  {
    std::ofstream(dir / "cut.ckpt", std::ios::binary) << bytes;
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "cut.ckpt"), IoError);
}

}
