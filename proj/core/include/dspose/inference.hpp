#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dspose/geometry.hpp"
#include "dspose/image.hpp"
#include "dspose/labeling.hpp"
#include "dspose/network.hpp"
#include "dspose/sampling.hpp"

namespace dspose {

struct InferenceConfig {
  int k = 3;               // rank threshold among l_1..l_L
  double lambda_h = 0.9;   // heatmap ratio threshold
  // When set, a patch whose background likelihood l_0 is at least its best
  // joint likelihood allocates no heat. By default the argmax runs over the
  // joints 1..L only.
  bool background_competes = false;

  void validate(int joints) const;
};

// Network output for one patch pair.
struct PatchResult {
  PatchPair pair;
  NetOutput output;
};

// Per-joint likelihood fields at image resolution. Joints are 1-based.
class HeatmapSet {
 public:
  HeatmapSet() = default;
  HeatmapSet(int joints, int width, int height);

  int joints() const { return joints_; }
  int width() const { return width_; }
  int height() const { return height_; }

  double& at(int joint, int x, int y) { return data_[index(joint, x, y)]; }
  double at(int joint, int x, int y) const { return data_[index(joint, x, y)]; }
  std::span<const double> plane(int joint) const;

  double max_over(int joint, const PixelRect& rect) const;
  double total(int joint) const;
  // Center of the first maximal pixel in row-major order.
  Point argmax(int joint) const;

 private:
  std::size_t index(int joint, int x, int y) const {
    return (static_cast<std::size_t>(joint - 1) * height_ + y) * width_ + x;
  }
  int joints_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Heat a single patch pair contributes: `per_pixel` to every pixel of
// `pixels` for `joint`. The divisor is the rasterized pixel count, so the
// allocated mass is exactly l_joint. joint == 0 means nothing is allocated.
struct HeatAllocation {
  int joint = 0;
  double per_pixel = 0.0;
  PixelRect pixels;
};

// Joint with the largest likelihood among 1..L, lowest index on ties.
int best_joint(const NetOutput& output);

HeatAllocation allocate_heat(const PatchPair& pair, const NetOutput& output, int width,
                             int height, const InferenceConfig& cfg);

// Pixelwise sum of allocate_heat over all results.
HeatmapSet build_heatmaps(std::span<const PatchResult> results, int width, int height,
                          const InferenceConfig& cfg);

// Indices of the results that satisfy, for `joint`:
//   l_0 < l_joint;
//   fewer than k other joints j in 1..L have l_j >= l_joint;
//   max of H_joint over the part patch > lambda_h * max over the body patch.
std::vector<std::size_t> select_patches_for_joint(int joint, std::span<const PatchResult> results,
                                                  const HeatmapSet& heatmaps,
                                                  const InferenceConfig& cfg);

// Likelihood-weighted mean of the selected localization outputs mapped back to
// image coordinates; heatmap argmax when nothing is selected.
Point fuse_joint_location(int joint, std::span<const std::size_t> selected,
                          std::span<const PatchResult> results, const HeatmapSet& heatmaps);

struct PoseEstimate {
  Pose pose;
  std::vector<int> selected;  // |P^i| per joint
  HeatmapSet heatmaps;
};

// Heatmaps, selection and fusion over precomputed results.
PoseEstimate fuse_pose(std::span<const PatchResult> results, int width, int height,
                       const InferenceConfig& cfg);

// Sliding-window part patches paired with the whole image as the body patch.
std::vector<PatchPair> window_pairs(ImageSize image, double torso_diameter,
                                    const SamplingConfig& sampling);

// Produces one output per patch pair.
using PatchEvaluator = std::function<std::vector<NetOutput>(std::span<const PatchPair>)>;

// Evaluates the network on every pair of `image`, reusing the resampled body.
PatchEvaluator network_evaluator(const NetworkParams& params, const Image& image);

// Ground-truth outputs: likelihood `confidence` on the true label, the rest
// spread evenly, and exact normalized locations for every joint.
NetOutput oracle_output(const PatchPair& pair, const Pose& truth, double confidence = 0.9);
PatchEvaluator oracle_evaluator(const Pose& truth, double confidence = 0.9);

PoseEstimate estimate_pose(ImageSize image, const PatchEvaluator& evaluate, double torso_diameter,
                           const SamplingConfig& sampling, const InferenceConfig& cfg);

PoseEstimate estimate_pose(const Image& image, const NetworkParams& params, double torso_diameter,
                           const SamplingConfig& sampling, const InferenceConfig& cfg);

}  // namespace dspose
