#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dspose/geometry.hpp"
#include "dspose/labeling.hpp"
#include "dspose/network.hpp"

namespace dspose {

struct LimbDefinition {
  std::string name;
  int a = 0;  // 0-based joint indices
  int b = 0;

  friend bool operator==(const LimbDefinition&, const LimbDefinition&) = default;
};

struct JointGroup {
  std::string name;
  std::vector<int> joints;

  friend bool operator==(const JointGroup&, const JointGroup&) = default;
};

struct PcpResult {
  std::vector<double> per_limb;     // aligned with the limb list
  std::vector<std::size_t> counted; // instances scored per limb
  double average = 0.0;             // mean over limbs with at least one instance
  std::size_t skipped = 0;          // zero-length ground-truth limbs

  // Mean of per_limb over limbs sharing `name`.
  double by_name(const std::string& name, std::span<const LimbDefinition> limbs) const;
};

// A limb is correct when both endpoint errors are <= half the true limb length.
PcpResult pcp(std::span<const Pose> estimated, std::span<const Pose> truth,
              std::span<const LimbDefinition> limbs);

struct PdjCurve {
  std::vector<double> fractions;
  std::vector<double> all;                  // rate over every joint
  std::vector<std::string> group_names;
  std::vector<std::vector<double>> groups;  // one rate vector per group
};

// A joint is detected when its error is < fraction * torso diameter.
PdjCurve pdj_curve(std::span<const Pose> estimated, std::span<const Pose> truth,
                   std::span<const double> torso_diameters, std::span<const double> fractions,
                   std::span<const JointGroup> groups = {});

// Evenly spaced fractions 0, step, ..., max.
std::vector<double> pdj_fractions(double max_fraction = 0.5, double step = 0.01);

struct ApResult {
  std::vector<double> per_joint;  // joint i at index i - 1; NaN when undefined
  std::vector<int> undefined;     // 1-based joints without positives
  double mean = 0.0;              // mAP over defined joints
};

// All-points interpolated average precision for detection score l_i against
// labels i* == i, per joint. Ties keep input order.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> positive);

ApResult detection_ap(std::span<const NetOutput> outputs, std::span<const PatchLabel> labels,
                      int joints);

}  // namespace dspose
