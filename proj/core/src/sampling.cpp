#include "dspose/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dspose/error.hpp"
#include "dspose/random.hpp"

namespace dspose {

void SamplingConfig::validate() const {
  if (!(mu1 > 0.0 && mu1 < mu2)) throw ConfigError("sampling requires 0 < mu1 < mu2");
  if (!(stride >= 1.0)) throw ConfigError("sampling stride must be >= 1");
  if (window_scales.empty()) throw ConfigError("window_scales must not be empty");
  for (double s : window_scales) {
    if (!(s > 0.0)) throw ConfigError("window scales must be positive");
  }
  if (proposal_count < 0 || body_proposal_count < 0) {
    throw ConfigError("proposal counts must be non-negative");
  }
}

double torso_diameter(const Pose& pose, TorsoPair torso) {
  return distance(pose[static_cast<std::size_t>(torso.first)],
                  pose[static_cast<std::size_t>(torso.second)]);
}

std::vector<Patch> filter_part_patches(std::span<const Patch> candidates, double d,
                                       const SamplingConfig& cfg) {
  const double lo = cfg.mu1 * d * d;
  const double hi = cfg.mu2 * d * d;
  std::vector<Patch> kept;
  for (const Patch& p : candidates) {
    const double area = p.w * p.h;
    if (lo <= area && area <= hi) kept.push_back(p);
  }
  return kept;
}

std::vector<Patch> filter_body_patches(std::span<const Patch> candidates, const Pose& pose) {
  std::vector<Patch> kept;
  for (const Patch& p : candidates) {
    if (visible_count(pose, p) == pose.size()) kept.push_back(p);
  }
  return kept;
}

namespace {

// Centers along one axis for a window of the given side.
std::vector<double> axis_centers(double extent, double side, double stride) {
  std::vector<double> centers;
  const double first = 0.5 * side;
  const double last = extent - 0.5 * side;
  if (last < first) {
    centers.push_back(0.5 * extent);
    return centers;
  }
  // Tolerance keeps the last center when (last - first) is a multiple of stride.
  const auto steps = static_cast<long>(std::floor((last - first) / stride + 1e-9));
  for (long k = 0; k <= steps; ++k) centers.push_back(first + k * stride);
  return centers;
}

}  // namespace

std::vector<Patch> sliding_windows(ImageSize image, double d, const SamplingConfig& cfg) {
  std::vector<Patch> windows;
  for (double scale : cfg.window_scales) {
    const double side = scale * d;
    const auto xs = axis_centers(image.width, side, cfg.stride);
    const auto ys = axis_centers(image.height, side, cfg.stride);
    for (double y : ys) {
      for (double x : xs) windows.push_back(Patch{side, side, Point{x, y}});
    }
  }
  return windows;
}

std::size_t sliding_window_count(ImageSize image, double d, const SamplingConfig& cfg) {
  auto axis = [&](double extent, double side) -> std::size_t {
    if (extent - side < 0.0) return 1;
    return static_cast<std::size_t>(std::floor((extent - side) / cfg.stride + 1e-9)) + 1;
  };
  std::size_t total = 0;
  for (double scale : cfg.window_scales) {
    total += axis(image.width, scale * d) * axis(image.height, scale * d);
  }
  return total;
}

std::vector<Patch> stub_proposals(ImageSize image, const Pose& pose, double d,
                                  const SamplingConfig& cfg, std::uint64_t stream) {
  std::vector<Patch> out;
  if (cfg.proposal_count <= 0 || pose.size() == 0) return out;
  Rng rng = make_rng(cfg.seed, stream::kProposal, stream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_joint(0, pose.size() - 1);
  // Joint-centered proposals cycle through the joints from a random start so
  // every joint gets its share.
  std::size_t next_joint = pick_joint(rng);

  const double log_lo = std::log(cfg.mu1 * d * d);
  const double log_hi = std::log(2.0 * cfg.mu2 * d * d);
  const double log_aspect = std::log(2.0);
  out.reserve(static_cast<std::size_t>(cfg.proposal_count));
  for (int n = 0; n < cfg.proposal_count; ++n) {
    const double area = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    const double aspect = std::exp(log_aspect * (2.0 * unit(rng) - 1.0));
    const double w = std::sqrt(area * aspect);
    const double h = area / w;
    Point c;
    if (unit(rng) < 0.7) {
      const Point j = pose[next_joint];
      next_joint = (next_joint + 1) % pose.size();
      // Uniform over the disc of radius 0.5 d.
      const double r = 0.5 * d * std::sqrt(unit(rng));
      const double t = 2.0 * std::numbers::pi * unit(rng);
      c = Point{j.x + r * std::cos(t), j.y + r * std::sin(t)};
    } else {
      c = Point{image.width * unit(rng), image.height * unit(rng)};
    }
    out.push_back(Patch{w, h, c});
  }
  return out;
}

std::vector<Patch> stub_body_proposals(ImageSize image, const Pose& pose, double d,
                                       const SamplingConfig& cfg, std::uint64_t stream) {
  std::vector<Patch> out;
  out.push_back(Patch::from_corners(0.0, 0.0, image.width, image.height));
  if (pose.size() == 0) return out;
  Rng rng = make_rng(cfg.seed, stream::kProposal, ~stream);
  std::uniform_real_distribution<double> margin(-0.1, 0.6);

  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const Point& j : pose.joints) {
    x0 = std::min(x0, j.x);
    y0 = std::min(y0, j.y);
    x1 = std::max(x1, j.x);
    y1 = std::max(y1, j.y);
  }
  for (int n = 0; n < cfg.body_proposal_count; ++n) {
    const double l = x0 - margin(rng) * d;
    const double t = y0 - margin(rng) * d;
    const double r = x1 + margin(rng) * d;
    const double b = y1 + margin(rng) * d;
    if (r > l && b > t) out.push_back(Patch::from_corners(l, t, r, b));
  }
  return out;
}

int closest_visible_joint(const Patch& patch, const Pose& pose) {
  int best = -1;
  double best_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pose.size(); ++i) {
    const NormalizedJoint n = normalize_joint(pose[i], patch);
    if (!n.visible()) continue;
    const double sq = n.squared_norm();
    if (sq < best_norm) {
      best_norm = sq;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<double> coverage_histogram(std::span<const std::vector<Patch>> patches_per_image,
                                       std::span<const Pose> poses) {
  if (patches_per_image.size() != poses.size()) {
    throw ShapeMismatch("coverage_histogram: patch lists and poses differ in length");
  }
  if (poses.empty()) return {};
  std::vector<double> counts(poses.front().size(), 0.0);
  for (std::size_t img = 0; img < poses.size(); ++img) {
    for (const Patch& p : patches_per_image[img]) {
      const int j = closest_visible_joint(p, poses[img]);
      if (j >= 0) counts[static_cast<std::size_t>(j)] += 1.0;
    }
  }
  for (double& c : counts) c /= static_cast<double>(poses.size());
  return counts;
}

}  // namespace dspose
