#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dspose/network.hpp"
#include "dspose/training.hpp"

namespace test {

// Small dual-tower net with randomized shape so kinks and pooling ties are rare.
inline dspose::LayerSpec small_spec(std::mt19937_64& rng, dspose::TowerMode mode) {
  std::uniform_int_distribution<int> filters(2, 3);
  dspose::LayerSpec spec;
  spec.input_size = 8;
  spec.joints = std::uniform_int_distribution<int>(2, 4)(rng);
  spec.towers = mode;
  spec.part_tower = {{filters(rng), 3, 1, true}, {filters(rng), 3, 1, false}};
  spec.body_tower = {{filters(rng), 3, 1, true}, {filters(rng), 3, 2, true}};
  spec.fully_connected = {std::uniform_int_distribution<int>(4, 6)(rng)};
  return spec;
}

inline dspose::DualInput random_input(std::mt19937_64& rng, int size) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  dspose::DualInput in;
  in.size = size;
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  in.part.resize(3 * plane);
  in.body.resize(4 * plane);
  for (double& v : in.part) v = u(rng);
  for (std::size_t i = 0; i < 3 * plane; ++i) in.body[i] = u(rng);
  for (std::size_t i = 3 * plane; i < 4 * plane; ++i) in.body[i] = u(rng) < 0.4 ? 1.0 : 0.0;
  return in;
}

inline dspose::PatchLabel random_label(std::mt19937_64& rng, int joints) {
  const int j = std::uniform_int_distribution<int>(0, joints)(rng);
  if (j == 0) return {};
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  return {j, dspose::NormalizedJoint{u(rng), u(rng)}};
}

// Randomizes every parameter, biases included, so no block has a trivially
// zero gradient.
inline void jitter(dspose::NetworkParams& params, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.3);
  for (double& v : params.values()) v += n(rng) * 0.5;
}

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

// Analytic gradient of lambda_d C_d + C_r summed over `inputs` against central
// differences. The relative error of one coordinate is
// |a - n| / max(|a|, |n|, floor), and 0 when both vanish exactly.
inline GradCheck check_gradient(dspose::NetworkParams params,
                                const std::vector<dspose::DualInput>& inputs,
                                const std::vector<dspose::PatchLabel>& labels, double lambda_d,
                                double step = 1e-5, double floor = 0.0) {
  using namespace dspose;
  std::vector<double> analytic(params.size(), 0.0);
  ForwardCache cache;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const NetOutput out = forward(params, inputs[s], cache);
    backward(params, cache, loss_gradient(out, labels[s], lambda_d), analytic);
  }
  auto loss = [&] {
    double total = 0.0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      const NetOutput out = forward(params, inputs[s], cache);
      total += lambda_d * detection_loss(out.likelihoods, labels[s].joint) +
               localization_loss(out.locations, labels[s]);
    }
    return total;
  };
  GradCheck result;
  result.parameters = params.size();
  auto values = params.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = loss();
    values[i] = saved - step;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    if (scale == 0.0) continue;
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / scale);
  }
  return result;
}

}  // namespace test
