#include "dspose/labeling.hpp"

#include <algorithm>
#include <numeric>

#include "dspose/error.hpp"
#include "dspose/random.hpp"
#include "dspose/sampling.hpp"

namespace dspose {

PatchLabel assign_label(const Patch& part, const Pose& pose) {
  const int closest = closest_visible_joint(part, pose);
  if (closest < 0) return PatchLabel{};
  return PatchLabel{closest + 1,
                    normalize_joint(pose[static_cast<std::size_t>(closest)], part)};
}

LabeledPair make_labeled_pair(const Patch& part, const Patch& body, const Pose& pose) {
  const Patch cropped = crop_to_body(part, body);
  const Patch square_part = extend_to_square(cropped);
  return LabeledPair{PatchPair{square_part, extend_to_square(body)},
                     assign_label(square_part, pose)};
}

std::vector<LabeledPair> build_training_pairs(std::span<const Patch> part_patches,
                                              std::span<const Patch> body_patches,
                                              const Pose& pose, std::uint64_t seed) {
  if (part_patches.empty() || body_patches.empty()) throw NoValidPairs();
  Rng rng = make_rng(seed, stream::kPairing);
  std::vector<LabeledPair> pairs;
  pairs.reserve(part_patches.size());
  std::vector<std::size_t> order(body_patches.size());
  for (const Patch& part : part_patches) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b : order) {
      try {
        pairs.push_back(make_labeled_pair(part, body_patches[b], pose));
        break;
      } catch (const EmptyIntersection&) {
      }
    }
  }
  if (pairs.empty()) throw NoValidPairs();
  return pairs;
}

void cap_background(std::vector<LabeledPair>& pairs, std::size_t joint_count,
                    std::uint64_t seed) {
  std::vector<std::size_t> background;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].label.background()) background.push_back(i);
  }
  const std::size_t foreground = pairs.size() - background.size();
  const std::size_t cap =
      joint_count == 0 ? 0 : (foreground + joint_count - 1) / joint_count;
  if (background.size() <= cap) return;

  Rng rng = make_rng(seed, stream::kBackground);
  std::shuffle(background.begin(), background.end(), rng);
  std::vector<std::uint8_t> drop(pairs.size(), 0);
  for (std::size_t k = cap; k < background.size(); ++k) drop[background[k]] = 1;
  std::size_t out = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!drop[i]) pairs[out++] = pairs[i];
  }
  pairs.resize(out);
}

}  // namespace dspose
