#pragma once

// Brute-force reference implementations. They deliberately avoid the library's
// helpers (rasterize, envelopes, argmax helpers) so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "dspose/evaluation.hpp"
#include "dspose/geometry.hpp"
#include "dspose/inference.hpp"

namespace test {

// Pixel (x, y) belongs to a patch when its center lies in [left, right) x
// [top, bottom); a patch covering no center owns the pixel holding its clamped
// center.
inline std::vector<std::pair<int, int>> patch_pixels(const dspose::Patch& p, int w, int h) {
  std::vector<std::pair<int, int>> px;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      if (cx >= p.left() && cx < p.right() && cy >= p.top() && cy < p.bottom()) px.push_back({x, y});
    }
  }
  if (px.empty()) {
    const int x = std::clamp(static_cast<int>(std::floor(p.center.x)), 0, w - 1);
    const int y = std::clamp(static_cast<int>(std::floor(p.center.y)), 0, h - 1);
    px.push_back({x, y});
  }
  return px;
}

// Joint (1-based) with the largest likelihood among 1..L, lowest on ties.
inline int argmax_joint(const std::vector<double>& l) {
  int best = 1;
  for (int j = 1; j < static_cast<int>(l.size()); ++j) {
    if (l[static_cast<std::size_t>(j)] > l[static_cast<std::size_t>(best)]) best = j;
  }
  return best;
}

// Sum of l_i over the patches whose argmax joint is i.
inline std::vector<double> expected_mass(std::span<const dspose::PatchResult> results, int joints) {
  std::vector<double> mass(static_cast<std::size_t>(joints), 0.0);
  for (const auto& r : results) {
    const int j = argmax_joint(r.output.likelihoods);
    mass[static_cast<std::size_t>(j - 1)] += r.output.likelihoods[static_cast<std::size_t>(j)];
  }
  return mass;
}

inline double region_max(const dspose::HeatmapSet& maps, int joint, const dspose::Patch& p) {
  double best = 0.0;
  for (auto [x, y] : patch_pixels(p, maps.width(), maps.height())) best = std::max(best, maps.at(joint, x, y));
  return best;
}

// Checks every selection condition directly for one result.
inline bool satisfies_selection(int joint, const dspose::PatchResult& r, const dspose::HeatmapSet& maps,
                                const dspose::InferenceConfig& cfg) {
  const auto& l = r.output.likelihoods;
  const double li = l[static_cast<std::size_t>(joint)];
  if (!(l[0] < li)) return false;
  // li must be among the k largest of l_1..l_L: sort the others descending and
  // require the k-th of them (if any) to be strictly smaller.
  std::vector<double> others;
  for (std::size_t j = 1; j < l.size(); ++j) {
    if (static_cast<int>(j) != joint) others.push_back(l[j]);
  }
  std::sort(others.begin(), others.end(), std::greater<>());
  if (static_cast<int>(others.size()) >= cfg.k && others[static_cast<std::size_t>(cfg.k - 1)] >= li) return false;
  return region_max(maps, joint, r.pair.part) > cfg.lambda_h * region_max(maps, joint, r.pair.body);
}

// l-weighted mean of the selected, denormalized localization outputs.
inline dspose::Point weighted_average(int joint, const std::vector<std::size_t>& selected,
                                      std::span<const dspose::PatchResult> results) {
  long double sx = 0, sy = 0, sw = 0;
  for (std::size_t r : selected) {
    const auto& res = results[r];
    const double w = res.output.likelihoods[static_cast<std::size_t>(joint)];
    const auto k = static_cast<std::size_t>(2 * (joint - 1));
    const double x = res.pair.part.center.x + res.output.locations[k] * res.pair.part.w;
    const double y = res.pair.part.center.y + res.output.locations[k + 1] * res.pair.part.h;
    sx += static_cast<long double>(w) * x;
    sy += static_cast<long double>(w) * y;
    sw += w;
  }
  return {static_cast<double>(sx / sw), static_cast<double>(sy / sw)};
}

// PCP per limb: hits / counted with inclusive half-length threshold.
inline std::vector<double> pcp_oracle(const std::vector<dspose::Pose>& est,
                                      const std::vector<dspose::Pose>& truth,
                                      const std::vector<dspose::LimbDefinition>& limbs) {
  std::vector<double> out;
  for (const auto& limb : limbs) {
    std::size_t hit = 0, n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto& ta = truth[i][static_cast<std::size_t>(limb.a)];
      const auto& tb = truth[i][static_cast<std::size_t>(limb.b)];
      const double len2 = (ta.x - tb.x) * (ta.x - tb.x) + (ta.y - tb.y) * (ta.y - tb.y);
      if (len2 == 0.0) continue;
      ++n;
      const double len = std::sqrt(len2);
      const auto& ea = est[i][static_cast<std::size_t>(limb.a)];
      const auto& eb = est[i][static_cast<std::size_t>(limb.b)];
      if (std::hypot(ea.x - ta.x, ea.y - ta.y) <= len / 2 && std::hypot(eb.x - tb.x, eb.y - tb.y) <= len / 2) ++hit;
    }
    out.push_back(n == 0 ? std::nan("") : static_cast<double>(hit) / static_cast<double>(n));
  }
  return out;
}

// PDJ rate over all (instance, joint) pairs with a strict threshold.
inline double pdj_oracle(const std::vector<dspose::Pose>& est, const std::vector<dspose::Pose>& truth,
                         const std::vector<double>& d, double f, const std::vector<int>* joints = nullptr) {
  std::size_t hit = 0, n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < truth[i].size(); ++j) {
      if (joints && std::find(joints->begin(), joints->end(), static_cast<int>(j)) == joints->end()) continue;
      ++n;
      if (std::hypot(est[i][j].x - truth[i][j].x, est[i][j].y - truth[i][j].y) / d[i] < f) ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(n);
}

// All-points AP by exhaustive search: for every positive, the best precision at
// its rank or any deeper rank, compared as exact fractions.
inline double ap_oracle(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  std::vector<std::size_t> tp(n);
  std::size_t count = 0, npos = 0;
  for (std::size_t r = 0; r < n; ++r) {
    count += positive[rank[r]];
    tp[r] = count;
  }
  npos = count;
  if (npos == 0) return std::nan("");
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!positive[rank[r]]) continue;
    std::size_t best_num = tp[r], best_den = r + 1;
    for (std::size_t m = r + 1; m < n; ++m) {
      if (tp[m] * best_den > best_num * (m + 1)) {
        best_num = tp[m];
        best_den = m + 1;
      }
    }
    sum += static_cast<double>(best_num) / static_cast<double>(best_den);
  }
  return sum / static_cast<double>(npos);
}

// Random patch results over a W x H image with L joints.
inline std::vector<dspose::PatchResult> random_results(std::mt19937_64& rng, int joints, int w, int h,
                                                       int count) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<dspose::PatchResult> results;
  const dspose::Patch body = dspose::Patch::from_corners(0, 0, w, h);
  for (int n = 0; n < count; ++n) {
    dspose::PatchResult r;
    const double side = 1.0 + u(rng) * 0.5 * w;
    r.pair.part = dspose::Patch{side, side * (0.5 + u(rng)), {u(rng) * w, u(rng) * h}};
    r.pair.body = body;
    double total = 0.0;
    r.output.likelihoods.resize(static_cast<std::size_t>(joints + 1));
    for (double& l : r.output.likelihoods) total += (l = u(rng) + 1e-3);
    for (double& l : r.output.likelihoods) l /= total;
    r.output.locations.resize(static_cast<std::size_t>(2 * joints));
    for (double& z : r.output.locations) z = u(rng) - 0.5;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace test
