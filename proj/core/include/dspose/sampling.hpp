#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dspose/geometry.hpp"

namespace dspose {

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Index pair of two opposing torso joints.
using TorsoPair = std::pair<int, int>;

struct SamplingConfig {
  double mu1 = 0.1;  // lower part-patch area coefficient
  double mu2 = 1.0;  // upper part-patch area coefficient
  std::vector<double> window_scales{0.5, 1.0};
  double stride = 2.0;
  int proposal_count = 50;
  int body_proposal_count = 4;
  std::uint64_t seed = 0;

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

double torso_diameter(const Pose& pose, TorsoPair torso);

// Keeps candidates with mu1 d^2 <= w h <= mu2 d^2.
std::vector<Patch> filter_part_patches(std::span<const Patch> candidates, double torso_diameter,
                                       const SamplingConfig& cfg);

// Keeps candidates that contain every joint of the pose.
std::vector<Patch> filter_body_patches(std::span<const Patch> candidates, const Pose& pose);

// Square windows of side s * d for every configured scale s. Window centers lie
// on a stride-spaced grid from s d / 2 to (extent - s d / 2) on each axis; an
// axis shorter than the window gets a single centered window.
std::vector<Patch> sliding_windows(ImageSize image, double torso_diameter,
                                   const SamplingConfig& cfg);

// Closed-form number of windows sliding_windows() emits.
std::size_t sliding_window_count(ImageSize image, double torso_diameter,
                                 const SamplingConfig& cfg);

// Stand-in for a category-independent object proposal generator. Emits
// proposal_count boxes whose areas are log-uniform in [mu1 d^2, 2 mu2 d^2] and
// whose aspect ratio is log-uniform in [1/2, 2]. 70% of the centers fall within
// 0.5 d of a uniformly chosen joint, the rest uniformly over the image.
// `stream` selects an independent random stream (typically the image index).
std::vector<Patch> stub_proposals(ImageSize image, const Pose& pose, double torso_diameter,
                                  const SamplingConfig& cfg, std::uint64_t stream);

// Body-scale stand-in proposals: the whole image plus body_proposal_count
// jittered boxes around the joint bounding box. Some jittered boxes cut off a
// joint and are expected to be rejected by filter_body_patches().
std::vector<Patch> stub_body_proposals(ImageSize image, const Pose& pose,
                                       double torso_diameter, const SamplingConfig& cfg,
                                       std::uint64_t stream);

// Index (0-based) of the visible joint closest to the patch center, lowest
// index on ties; -1 when no joint is visible.
int closest_visible_joint(const Patch& patch, const Pose& pose);

// Mean (over images) number of part patches that cover each joint, where a
// patch covers joint i if i is visible and is the closest visible joint to the
// patch center.
std::vector<double> coverage_histogram(std::span<const std::vector<Patch>> patches_per_image,
                                       std::span<const Pose> poses);

}  // namespace dspose
