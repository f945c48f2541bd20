#include "dspose/inference.hpp"

#include <algorithm>
#include <tuple>

#include "dspose/error.hpp"
#include "dspose/parallel.hpp"

namespace dspose {

void InferenceConfig::validate(int joints) const {
  if (k < 1 || k > joints) throw ConfigError("k must be in [1, L]");
  if (!(lambda_h > 0.0 && lambda_h <= 1.0)) throw ConfigError("lambda_h must be in (0, 1]");
}

HeatmapSet::HeatmapSet(int joints, int width, int height)
    : joints_(joints),
      width_(width),
      height_(height),
      data_(static_cast<std::size_t>(joints) * width * height, 0.0) {}

std::span<const double> HeatmapSet::plane(int joint) const {
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(joint - 1) * n, n);
}

double HeatmapSet::max_over(int joint, const PixelRect& rect) const {
  double best = 0.0;
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) best = std::max(best, at(joint, x, y));
  }
  return best;
}

double HeatmapSet::total(int joint) const {
  double sum = 0.0;
  for (double v : plane(joint)) sum += v;
  return sum;
}

Point HeatmapSet::argmax(int joint) const {
  const auto p = plane(joint);
  const auto it = std::max_element(p.begin(), p.end());
  const auto idx = static_cast<int>(it - p.begin());
  return Point{idx % width_ + 0.5, idx / width_ + 0.5};
}

int best_joint(const NetOutput& output) {
  int best = 1;
  for (int j = 2; j < static_cast<int>(output.likelihoods.size()); ++j) {
    if (output.likelihoods[static_cast<std::size_t>(j)] >
        output.likelihoods[static_cast<std::size_t>(best)]) {
      best = j;
    }
  }
  return best;
}

HeatAllocation allocate_heat(const PatchPair& pair, const NetOutput& output, int width,
                             int height, const InferenceConfig& cfg) {
  HeatAllocation a;
  const int joint = best_joint(output);
  const double l = output.likelihoods[static_cast<std::size_t>(joint)];
  if (cfg.background_competes && output.likelihoods[0] >= l) return a;
  a.joint = joint;
  a.pixels = rasterize(pair.part, width, height);
  a.per_pixel = l / static_cast<double>(a.pixels.area());
  return a;
}

HeatmapSet build_heatmaps(std::span<const PatchResult> results, int width, int height,
                          const InferenceConfig& cfg) {
  const int joints = results.empty() ? 0 : results.front().output.joints();
  HeatmapSet maps(joints, width, height);
  for (const PatchResult& r : results) {
    const HeatAllocation a = allocate_heat(r.pair, r.output, width, height, cfg);
    if (a.joint == 0) continue;
    for (int y = a.pixels.y0; y < a.pixels.y1; ++y) {
      for (int x = a.pixels.x0; x < a.pixels.x1; ++x) maps.at(a.joint, x, y) += a.per_pixel;
    }
  }
  return maps;
}

std::vector<std::size_t> select_patches_for_joint(int joint, std::span<const PatchResult> results,
                                                  const HeatmapSet& heatmaps,
                                                  const InferenceConfig& cfg) {
  std::vector<std::size_t> selected;
  if (heatmaps.joints() < joint) return selected;
  const int w = heatmaps.width(), h = heatmaps.height();
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& l = results[r].output.likelihoods;
    const double li = l[static_cast<std::size_t>(joint)];
    if (!(l[0] < li)) continue;
    int at_least = 0;
    for (std::size_t j = 1; j < l.size(); ++j) {
      if (static_cast<int>(j) != joint && l[j] >= li) ++at_least;
    }
    if (at_least >= cfg.k) continue;
    const double part_max = heatmaps.max_over(joint, rasterize(results[r].pair.part, w, h));
    const double body_max = heatmaps.max_over(joint, rasterize(results[r].pair.body, w, h));
    if (part_max > cfg.lambda_h * body_max) selected.push_back(r);
  }
  return selected;
}

Point fuse_joint_location(int joint, std::span<const std::size_t> selected,
                          std::span<const PatchResult> results, const HeatmapSet& heatmaps) {
  if (selected.empty()) return heatmaps.argmax(joint);
  double sx = 0.0, sy = 0.0, sw = 0.0;
  for (std::size_t r : selected) {
    const PatchResult& res = results[r];
    const double weight = res.output.likelihoods[static_cast<std::size_t>(joint)];
    const Point z = denormalize_joint(res.output.location(joint), res.pair.part);
    sx += weight * z.x;
    sy += weight * z.y;
    sw += weight;
  }
  return Point{sx / sw, sy / sw};
}

namespace {

// Total order on results so that floating-point sums do not depend on the
// order patches arrive in.
bool canonical_less(const PatchResult& a, const PatchResult& b) {
  const auto key = [](const PatchResult& r) {
    const Patch& p = r.pair.part;
    const Patch& q = r.pair.body;
    return std::tie(p.center.y, p.center.x, p.w, p.h, q.center.y, q.center.x, q.w, q.h,
                    r.output.likelihoods, r.output.locations);
  };
  return key(a) < key(b);
}

}  // namespace

PoseEstimate fuse_pose(std::span<const PatchResult> unordered, int width, int height,
                       const InferenceConfig& cfg) {
  std::vector<PatchResult> results(unordered.begin(), unordered.end());
  std::stable_sort(results.begin(), results.end(), canonical_less);
  PoseEstimate est;
  est.heatmaps = build_heatmaps(results, width, height, cfg);
  const int joints = est.heatmaps.joints();
  est.pose = Pose(static_cast<std::size_t>(joints));
  est.selected.assign(static_cast<std::size_t>(joints), 0);
  for (int j = 1; j <= joints; ++j) {
    const auto sel = select_patches_for_joint(j, results, est.heatmaps, cfg);
    est.selected[static_cast<std::size_t>(j - 1)] = static_cast<int>(sel.size());
    est.pose[static_cast<std::size_t>(j - 1)] = fuse_joint_location(j, sel, results, est.heatmaps);
  }
  return est;
}

std::vector<PatchPair> window_pairs(ImageSize image, double d, const SamplingConfig& sampling) {
  const Patch body = Patch::from_corners(0.0, 0.0, image.width, image.height);
  const Patch square_body = extend_to_square(body);
  std::vector<PatchPair> pairs;
  for (const Patch& window : sliding_windows(image, d, sampling)) {
    pairs.push_back(PatchPair{extend_to_square(crop_to_body(window, body)), square_body});
  }
  return pairs;
}

PatchEvaluator network_evaluator(const NetworkParams& params, const Image& image) {
  return [&params, &image](std::span<const PatchPair> pairs) {
    const int n = params.spec().input_size;
    std::vector<NetOutput> outputs(pairs.size());
    if (pairs.empty()) return outputs;
    // Every pair shares the body patch in the sliding-window setting.
    const PixelBlock shared_body = resample_patch(image, pairs.front().body, n);
    const std::size_t chunks = (pairs.size() + 31) / 32;
    parallel_for(chunks, [&](std::size_t c) {
      ForwardCache cache;
      const std::size_t hi = std::min(pairs.size(), (c + 1) * 32);
      for (std::size_t i = c * 32; i < hi; ++i) {
        const PatchPair& pair = pairs[i];
        const PixelBlock body = pair.body == pairs.front().body
                                    ? shared_body
                                    : resample_patch(image, pair.body, n);
        const DualInput input =
            build_inputs(resample_patch(image, pair.part, n), body, pair.part, pair.body);
        outputs[i] = forward(params, input, cache);
      }
    });
    return outputs;
  };
}

NetOutput oracle_output(const PatchPair& pair, const Pose& truth, double confidence) {
  const auto joints = truth.size();
  NetOutput out;
  out.likelihoods.assign(joints + 1, (1.0 - confidence) / static_cast<double>(joints));
  out.likelihoods[static_cast<std::size_t>(assign_label(pair.part, truth).joint)] = confidence;
  out.locations.resize(2 * joints);
  for (std::size_t i = 0; i < joints; ++i) {
    const NormalizedJoint n = normalize_joint(truth[i], pair.part);
    out.locations[2 * i] = n.x;
    out.locations[2 * i + 1] = n.y;
  }
  return out;
}

PatchEvaluator oracle_evaluator(const Pose& truth, double confidence) {
  return [truth, confidence](std::span<const PatchPair> pairs) {
    std::vector<NetOutput> outputs;
    outputs.reserve(pairs.size());
    for (const PatchPair& p : pairs) outputs.push_back(oracle_output(p, truth, confidence));
    return outputs;
  };
}

PoseEstimate estimate_pose(ImageSize image, const PatchEvaluator& evaluate, double d,
                           const SamplingConfig& sampling, const InferenceConfig& cfg) {
  const auto pairs = window_pairs(image, d, sampling);
  const auto outputs = evaluate(pairs);
  if (outputs.size() != pairs.size()) throw ShapeMismatch("evaluator returned the wrong number of outputs");
  std::vector<PatchResult> results(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) results[i] = PatchResult{pairs[i], outputs[i]};
  if (!results.empty()) cfg.validate(results.front().output.joints());
  return fuse_pose(results, image.width, image.height, cfg);
}

PoseEstimate estimate_pose(const Image& image, const NetworkParams& params, double d,
                           const SamplingConfig& sampling, const InferenceConfig& cfg) {
  return estimate_pose(ImageSize{image.width(), image.height()}, network_evaluator(params, image),
                       d, sampling, cfg);
}

}  // namespace dspose
