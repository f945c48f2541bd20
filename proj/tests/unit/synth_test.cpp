#include <cmath>

#include "doctest.h"
#include "dspose/dataset.hpp"
#include "dspose/error.hpp"
#include "dspose/sampling.hpp"
#include "dspose/synth.hpp"

using namespace dspose;

TEST_SUITE("synth") {

TEST_CASE("generation is deterministic per seed and index") {
  FigureConfig cfg = FigureConfig::lsp_default();
  cfg.seed = 3;
  const Figure a = generate_figure(cfg, 17), b = generate_figure(cfg, 17), c = generate_figure(cfg, 18);
  CHECK(a.image == b.image);
  CHECK(a.pose == b.pose);
  CHECK_FALSE(a.image == c.image);
  cfg.seed = 4;
  CHECK_FALSE(generate_figure(cfg, 17).pose == a.pose);
}

TEST_CASE("forward kinematics matches hand-placed joints") {
  FigureConfig cfg;
  cfg.joint_count = 3;
  cfg.root_joint = 0;
  cfg.head_joint = -1;
  cfg.noise = 0.0;
  cfg.clutter_count = 0;
  // Bone 1 leaves the root along the body axis (straight down), bone 2 turns
  // 90 degrees from it.
  cfg.bones = {Bone{0, 1, 0.0, 0.0, 0.0, 10, 10, 3, PartColor::torso},
               Bone{1, 2, std::numbers::pi / 2, 0.0, 0.0, 5, 5, 3, PartColor::arm}};
  Articulation art{Point{20, 10}, 0.0, {0.0, 0.0}, {10.0, 5.0}};
  Pose p = forward_kinematics(cfg, art);
  CHECK(std::abs(p[1].x - 20) < 1e-9);
  CHECK(std::abs(p[1].y - 20) < 1e-9);
  CHECK(std::abs(p[2].x - 15) < 1e-9);
  CHECK(std::abs(p[2].y - 20) < 1e-9);

  // A generated figure's pose equals forward kinematics of its articulation.
  const FigureConfig lsp = FigureConfig::lsp_default();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Figure f = generate_figure(lsp, i);
    const Pose fk = forward_kinematics(lsp, f.articulation);
    for (std::size_t j = 0; j < fk.size(); ++j) {
      CHECK(std::abs(fk[j].x - f.pose[j].x) < 1e-9);
      CHECK(std::abs(fk[j].y - f.pose[j].y) < 1e-9);
    }
    CHECK(render_figure(lsp, f.articulation, i) == f.image);
  }
}

TEST_CASE("joints stay inside the image") {
  const FigureConfig cfg = FigureConfig::lsp_default();
  const auto torso = DatasetManifest::lsp_schema().torso;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Figure f = generate_figure(cfg, i);
    REQUIRE(f.pose.size() == 14);
    for (const Point& j : f.pose.joints) {
      CHECK(j.x >= cfg.margin - 1e-9);
      CHECK(j.y >= cfg.margin - 1e-9);
      CHECK(j.x <= cfg.width - cfg.margin + 1e-9);
      CHECK(j.y <= cfg.height - cfg.margin + 1e-9);
    }
    CHECK(torso_diameter(f.pose, torso) > 5.0);
  }
}

TEST_CASE("rendering draws the figure") {
  FigureConfig cfg = FigureConfig::lsp_default();
  cfg.noise = 0.0;
  cfg.clutter_count = 0;
  const Figure f = generate_figure(cfg, 2);
  // The neck sits on the torso, whose color differs from the flat background.
  const auto& neck = f.pose[12];
  const Image& img = f.image;
  const auto at = [&](int x, int y) {
    return std::array<int, 3>{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
  };
  CHECK(at(static_cast<int>(neck.x), static_cast<int>(neck.y + 2)) != at(0, 0));
}

TEST_CASE("skeleton validation") {
  FigureConfig cfg = FigureConfig::lsp_default();
  CHECK_NOTHROW(cfg.validate());
  cfg.bones.pop_back();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FigureConfig::lsp_default();
  std::swap(cfg.bones[5], cfg.bones[6]);  // child placed before its parent
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FigureConfig::lsp_default();
  cfg.bones[3].length_min = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}
