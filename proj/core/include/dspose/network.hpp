#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dspose/geometry.hpp"
#include "dspose/image.hpp"
#include "dspose/labeling.hpp"

namespace dspose {

// Which input sources feed the shared fully-connected stack.
enum class TowerMode { dual, part_only, body_only };

std::string_view to_string(TowerMode mode);
TowerMode parse_tower_mode(std::string_view text);

// A "same"-padded convolution (pad = kernel / 2), ReLU, then an optional 2x2
// max pool with stride 2.
struct ConvLayerSpec {
  int filters = 0;
  int kernel = 0;
  int stride = 1;
  bool pool = false;

  friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

struct LayerSpec {
  int input_size = 32;  // N: both sources are N x N
  int joints = 14;      // L
  TowerMode towers = TowerMode::dual;
  std::vector<ConvLayerSpec> part_tower;
  std::vector<ConvLayerSpec> body_tower;
  std::vector<int> fully_connected;  // shared ReLU layers, both heads read the last

  // N = 32; towers 8@5x5, 16@5x5, 32@3x3 each followed by pooling; FC 128, 64.
  static LayerSpec desk_default(int joints, TowerMode towers = TowerMode::dual);
  // Five convolutions per tower with pooling after layers 1, 2 and 5 and three
  // fully-connected layers, sized after the ImageNet network the method
  // builds on. Trainable only with pretraining; kept for completeness.
  static LayerSpec krizhevsky_shape(int joints);

  bool uses_part() const { return towers != TowerMode::body_only; }
  bool uses_body() const { return towers != TowerMode::part_only; }
  int detection_width() const { return joints + 1; }
  int localization_width() const { return 2 * joints; }

  // Throws ShapeMismatch if the layer stack collapses the input or is empty.
  void validate() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Named slice of the flat parameter vector.
struct ParamBlock {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

// Layout shared by parameters and gradients:
//   {part,body}.conv<k>.{weight [F,C,k,k], bias [F]}
//   fc<k>.{weight [out,in], bias [out]}
//   detection.{weight [L+1,H], bias}, localization.{weight [2L,H], bias}
std::vector<ParamBlock> parameter_layout(const LayerSpec& spec);

class NetworkParams {
 public:
  NetworkParams() = default;
  // Zero-initialized parameters for `spec`.
  explicit NetworkParams(LayerSpec spec);

  const LayerSpec& spec() const { return spec_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(std::string_view name) const;
  std::span<double> block_values(std::string_view name);
  std::span<const double> block_values(std::string_view name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;

 private:
  LayerSpec spec_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
};

// He initialization: weights ~ N(0, 2 / fan_in), biases zero.
NetworkParams init_params(const LayerSpec& spec, std::uint64_t seed);

// Part source: 3 x N x N RGB. Body source: 4 x N x N, RGB plus a binary mask
// marking where the part patch sits inside the body patch.
struct DualInput {
  int size = 0;
  std::vector<double> part;
  std::vector<double> body;
};

// Mask at body-block resolution: a body pixel is 1 when its center, mapped to
// image coordinates, lies in the closed part box.
std::vector<double> rasterize_mask(const Patch& part, const Patch& body, int size);

DualInput build_inputs(const PixelBlock& part_pixels, const PixelBlock& body_pixels,
                       const Patch& part, const Patch& body);

// Resamples both patches of `pair` from `image` and builds the input.
DualInput make_dual_input(const Image& image, const PatchPair& pair, int size);

struct NetOutput {
  std::vector<double> likelihoods;  // l_0..l_L, softmax
  std::vector<double> locations;    // (x_1, y_1, ..., x_L, y_L), normalized

  int joints() const { return static_cast<int>(locations.size() / 2); }
  // joint is 1-based.
  NormalizedJoint location(int joint) const {
    const auto k = static_cast<std::size_t>(2 * (joint - 1));
    return {locations[k], locations[k + 1]};
  }
};

// Loss derivative with respect to the detection logits and the localization
// outputs.
struct OutputGradient {
  std::vector<double> logits;
  std::vector<double> locations;
};

struct ConvCache {
  int in_channels = 0, in_h = 0, in_w = 0;
  int out_h = 0, out_w = 0;      // after convolution
  int pooled_h = 0, pooled_w = 0;  // after pooling (== out when no pool)
  std::vector<double> cols;        // im2col of the input
  std::vector<double> activation;  // ReLU output, F x out_h x out_w
  std::vector<int> pool_index;     // argmax position per pooled cell
  std::vector<double> output;      // layer output fed to the next layer
};

// Activations recorded by forward() and scratch space for backward(). Reuse one
// cache per worker to avoid reallocations.
struct ForwardCache {
  std::vector<ConvCache> part;
  std::vector<ConvCache> body;
  const DualInput* input = nullptr;
  std::vector<double> features;                 // concatenated tower outputs
  std::vector<std::vector<double>> hidden;      // shared FC activations
  NetOutput output;

  // backward() scratch.
  std::vector<double> grad_a, grad_b, grad_cols;
};

// Deterministic forward pass. Throws ShapeMismatch if the parameters or the
// input do not match the spec.
NetOutput forward(const NetworkParams& params, const DualInput& input, ForwardCache& cache);
NetOutput forward(const NetworkParams& params, const DualInput& input);

// Adds d(loss)/d(params) to `gradient` (same layout as params.values()) given
// the cache of the most recent forward() on the same parameters and input.
void backward(const NetworkParams& params, ForwardCache& cache, const OutputGradient& grad,
              std::span<double> gradient);

}  // namespace dspose
