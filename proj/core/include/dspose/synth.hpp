#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspose/geometry.hpp"
#include "dspose/image.hpp"

namespace dspose {

enum class PartColor { torso, arm, leg, head };

// A bone places `child` relative to `parent`. Its direction is the parent
// bone's direction (the body axis for bones leaving the root) rotated by
// rest_angle + a deviation drawn from [angle_min, angle_max]. Angles are in
// radians, image y axis pointing down.
struct Bone {
  int parent = 0;
  int child = 0;
  double rest_angle = 0.0;
  double angle_min = 0.0;
  double angle_max = 0.0;
  double length_min = 1.0;
  double length_max = 1.0;
  double thickness = 3.0;
  PartColor color = PartColor::torso;
};

struct FigureConfig {
  int width = 64;
  int height = 64;
  int joint_count = 14;
  int root_joint = 12;  // neck
  std::vector<Bone> bones;
  std::vector<int> torso_polygon;  // joints of a filled convex torso, optional
  int head_joint = 13;             // head disc drawn between root and this joint; -1 for none
  double head_radius = 4.5;
  double lean_range = 0.2;         // body axis deviation from vertical, radians
  double scale_min = 0.8;
  double scale_max = 1.1;
  double margin = 3.0;             // minimum distance of any joint to the border
  double color_jitter = 0.12;
  int clutter_count = 6;
  double noise = 0.03;             // per-pixel Gaussian noise sigma, [0, 1] units
  std::uint64_t seed = 0;

  // 14-joint full-body skeleton in the LSP joint order.
  static FigureConfig lsp_default();
  // Throws ConfigError unless the bones form a tree over all joints rooted at
  // root_joint with parents placed before children.
  void validate() const;
};

// Sampled pose parameters. deviations and lengths are per bone.
struct Articulation {
  Point root;
  double lean = 0.0;
  std::vector<double> deviations;
  std::vector<double> lengths;
};

Pose forward_kinematics(const FigureConfig& cfg, const Articulation& articulation);

struct Figure {
  Image image;
  Pose pose;
  Articulation articulation;
};

// Deterministic per (cfg.seed, index).
Figure generate_figure(const FigureConfig& cfg, std::uint64_t index);

// Renders a figure for a fixed articulation onto a generated background.
Image render_figure(const FigureConfig& cfg, const Articulation& articulation,
                    std::uint64_t index);

}  // namespace dspose
