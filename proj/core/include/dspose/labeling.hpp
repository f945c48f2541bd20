#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dspose/geometry.hpp"

namespace dspose {

// Class label of a patch pair. joint is 1-based (1..L); 0 means no joint is
// visible in the part patch and target is empty.
struct PatchLabel {
  int joint = 0;
  std::optional<NormalizedJoint> target;

  bool background() const { return joint == 0; }
  friend bool operator==(const PatchLabel&, const PatchLabel&) = default;
};

// Network-ready pair: `part` is cropped to the body and square-extended,
// `body` is square-extended.
struct PatchPair {
  Patch part;
  Patch body;

  friend bool operator==(const PatchPair&, const PatchPair&) = default;
};

struct LabeledPair {
  PatchPair pair;
  PatchLabel label;
};

// Closest visible joint to the center of `part` in normalized coordinates,
// lowest index on ties.
PatchLabel assign_label(const Patch& part, const Pose& pose);

// Crops the part to the body, squares both and labels the squared part.
// Throws EmptyIntersection when the boxes do not overlap.
LabeledPair make_labeled_pair(const Patch& part, const Patch& body, const Pose& pose);

// Pairs every part patch with a uniformly drawn body patch. Parts that do not
// overlap their drawn body are redrawn against the remaining bodies and dropped
// if none overlaps. Throws NoValidPairs when nothing survives.
std::vector<LabeledPair> build_training_pairs(std::span<const Patch> part_patches,
                                              std::span<const Patch> body_patches,
                                              const Pose& pose, std::uint64_t seed);

// Drops background pairs beyond ceil(foreground / joint_count), keeping a
// seeded random subset. Foreground pairs and relative order are preserved.
void cap_background(std::vector<LabeledPair>& pairs, std::size_t joint_count,
                    std::uint64_t seed);

}  // namespace dspose
