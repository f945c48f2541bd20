#include "dspose/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dspose/error.hpp"

namespace dspose {

namespace {

void check_aligned(std::span<const Pose> estimated, std::span<const Pose> truth) {
  if (estimated.size() != truth.size()) throw ShapeMismatch("estimated and true pose lists differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (estimated[i].size() != truth[i].size()) {
      throw ShapeMismatch("pose " + std::to_string(i) + " has a different joint count");
    }
  }
}

}  // namespace

double PcpResult::by_name(const std::string& name, std::span<const LimbDefinition> limbs) const {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < limbs.size() && k < per_limb.size(); ++k) {
    if (limbs[k].name == name && counted[k] > 0) {
      sum += per_limb[k];
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

PcpResult pcp(std::span<const Pose> estimated, std::span<const Pose> truth,
              std::span<const LimbDefinition> limbs) {
  check_aligned(estimated, truth);
  PcpResult result;
  result.per_limb.assign(limbs.size(), std::numeric_limits<double>::quiet_NaN());
  result.counted.assign(limbs.size(), 0);
  double sum = 0.0;
  int scored_limbs = 0;
  for (std::size_t k = 0; k < limbs.size(); ++k) {
    const auto a = static_cast<std::size_t>(limbs[k].a);
    const auto b = static_cast<std::size_t>(limbs[k].b);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const double length = distance(truth[i][a], truth[i][b]);
      if (length == 0.0) {
        ++result.skipped;
        continue;
      }
      ++result.counted[k];
      const double half = 0.5 * length;
      if (distance(estimated[i][a], truth[i][a]) <= half &&
          distance(estimated[i][b], truth[i][b]) <= half) {
        ++correct;
      }
    }
    if (result.counted[k] > 0) {
      result.per_limb[k] = static_cast<double>(correct) / static_cast<double>(result.counted[k]);
      sum += result.per_limb[k];
      ++scored_limbs;
    }
  }
  result.average = scored_limbs == 0 ? 0.0 : sum / scored_limbs;
  return result;
}

PdjCurve pdj_curve(std::span<const Pose> estimated, std::span<const Pose> truth,
                   std::span<const double> torso_diameters, std::span<const double> fractions,
                   std::span<const JointGroup> groups) {
  check_aligned(estimated, truth);
  if (torso_diameters.size() != truth.size()) throw ShapeMismatch("one torso diameter per instance is required");
  PdjCurve curve;
  curve.fractions.assign(fractions.begin(), fractions.end());

  // Normalized error of every (instance, joint).
  std::vector<std::vector<double>> err(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!(torso_diameters[i] > 0.0)) throw ShapeMismatch("torso diameter must be positive");
    for (std::size_t j = 0; j < truth[i].size(); ++j) {
      err[i].push_back(distance(estimated[i][j], truth[i][j]) / torso_diameters[i]);
    }
  }
  auto rate = [&](double f, const std::vector<int>* subset) {
    std::size_t hit = 0, total = 0;
    for (std::size_t i = 0; i < err.size(); ++i) {
      const double limit = f;
      if (subset) {
        for (int j : *subset) {
          ++total;
          if (err[i][static_cast<std::size_t>(j)] < limit) ++hit;
        }
      } else {
        for (double e : err[i]) {
          ++total;
          if (e < limit) ++hit;
        }
      }
    }
    return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
  };
  for (double f : fractions) curve.all.push_back(rate(f, nullptr));
  for (const JointGroup& g : groups) {
    curve.group_names.push_back(g.name);
    std::vector<double> r;
    for (double f : fractions) r.push_back(rate(f, &g.joints));
    curve.groups.push_back(std::move(r));
  }
  return curve;
}

std::vector<double> pdj_fractions(double max_fraction, double step) {
  std::vector<double> f;
  const auto n = static_cast<int>(std::floor(max_fraction / step + 1e-9));
  for (int k = 0; k <= n; ++k) f.push_back(k * step);
  return f;
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw ShapeMismatch("scores and labels differ in length");
  const auto npos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), 1));
  if (npos == 0) return std::numeric_limits<double>::quiet_NaN();

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<double> precision(order.size());
  std::size_t tp = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (positive[order[r]]) ++tp;
    precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
  }
  // Precision envelope: best precision at this rank or deeper.
  for (std::size_t r = order.size(); r-- > 1;) precision[r - 1] = std::max(precision[r - 1], precision[r]);

  double ap = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (positive[order[r]]) ap += precision[r];
  }
  return ap / static_cast<double>(npos);
}

ApResult detection_ap(std::span<const NetOutput> outputs, std::span<const PatchLabel> labels,
                      int joints) {
  if (outputs.size() != labels.size()) throw ShapeMismatch("outputs and labels differ in length");
  ApResult result;
  double sum = 0.0;
  int defined = 0;
  std::vector<double> scores(outputs.size());
  std::vector<std::uint8_t> positive(outputs.size());
  for (int j = 1; j <= joints; ++j) {
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      scores[i] = outputs[i].likelihoods[static_cast<std::size_t>(j)];
      positive[i] = labels[i].joint == j ? 1 : 0;
    }
    const double ap = average_precision(scores, positive);
    result.per_joint.push_back(ap);
    if (std::isnan(ap)) {
      result.undefined.push_back(j);
    } else {
      sum += ap;
      ++defined;
    }
  }
  result.mean = defined == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / defined;
  return result;
}

}  // namespace dspose
