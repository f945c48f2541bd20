#include "dspose/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dspose/error.hpp"
#include "dspose/random.hpp"

namespace dspose {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

struct TensorShape {
  int channels = 0;
  int h = 0;
  int w = 0;
  std::size_t size() const { return static_cast<std::size_t>(channels) * h * w; }
};

int conv_extent(int in, const ConvLayerSpec& layer) {
  const int pad = layer.kernel / 2;
  return (in + 2 * pad - layer.kernel) / layer.stride + 1;
}

TensorShape tower_output(const std::vector<ConvLayerSpec>& tower, TensorShape in) {
  for (const ConvLayerSpec& layer : tower) {
    if (layer.filters <= 0 || layer.kernel <= 0 || layer.stride <= 0) {
      throw ShapeMismatch("convolution layers need positive filters, kernel and stride");
    }
    in = TensorShape{layer.filters, conv_extent(in.h, layer), conv_extent(in.w, layer)};
    if (layer.pool) {
      in.h /= 2;
      in.w /= 2;
    }
    if (in.h < 1 || in.w < 1) throw ShapeMismatch("convolution tower collapses the input");
  }
  return in;
}

std::size_t feature_width(const LayerSpec& spec) {
  std::size_t width = 0;
  if (spec.uses_part()) width += tower_output(spec.part_tower, {3, spec.input_size, spec.input_size}).size();
  if (spec.uses_body()) width += tower_output(spec.body_tower, {4, spec.input_size, spec.input_size}).size();
  return width;
}

}  // namespace

std::string_view to_string(TowerMode mode) {
  switch (mode) {
    case TowerMode::dual: return "dual";
    case TowerMode::part_only: return "part";
    case TowerMode::body_only: return "body";
  }
  return "dual";
}

TowerMode parse_tower_mode(std::string_view text) {
  if (text == "dual") return TowerMode::dual;
  if (text == "part") return TowerMode::part_only;
  if (text == "body") return TowerMode::body_only;
  throw ConfigError("unknown tower mode '" + std::string(text) + "' (expected part, body or dual)");
}

LayerSpec LayerSpec::desk_default(int joints, TowerMode towers) {
  LayerSpec spec;
  spec.input_size = 32;
  spec.joints = joints;
  spec.towers = towers;
  spec.part_tower = {{8, 5, 1, true}, {16, 5, 1, true}, {32, 3, 1, true}};
  spec.body_tower = spec.part_tower;
  spec.fully_connected = {128, 64};
  return spec;
}

LayerSpec LayerSpec::krizhevsky_shape(int joints) {
  LayerSpec spec;
  spec.input_size = 227;
  spec.joints = joints;
  spec.towers = TowerMode::dual;
  spec.part_tower = {{96, 11, 4, true},
                     {256, 5, 1, true},
                     {384, 3, 1, false},
                     {384, 3, 1, false},
                     {256, 3, 1, true}};
  spec.body_tower = spec.part_tower;
  spec.fully_connected = {4096, 4096, 4096};
  return spec;
}

void LayerSpec::validate() const {
  if (input_size < 1) throw ShapeMismatch("input size must be positive");
  if (joints < 1) throw ShapeMismatch("joint count must be positive");
  if (uses_part() && part_tower.empty()) throw ShapeMismatch("part tower has no layers");
  if (uses_body() && body_tower.empty()) throw ShapeMismatch("body tower has no layers");
  for (int width : fully_connected) {
    if (width < 1) throw ShapeMismatch("fully-connected widths must be positive");
  }
  (void)feature_width(*this);
}

std::vector<ParamBlock> parameter_layout(const LayerSpec& spec) {
  spec.validate();
  std::vector<ParamBlock> blocks;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<int> shape) {
    std::size_t size = 1;
    for (int d : shape) size *= static_cast<std::size_t>(d);
    blocks.push_back(ParamBlock{std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  auto add_tower = [&](const std::string& prefix, const std::vector<ConvLayerSpec>& tower,
                       int channels) {
    for (std::size_t k = 0; k < tower.size(); ++k) {
      const auto& layer = tower[k];
      const std::string base = prefix + ".conv" + std::to_string(k + 1);
      add(base + ".weight", {layer.filters, channels, layer.kernel, layer.kernel});
      add(base + ".bias", {layer.filters});
      channels = layer.filters;
    }
  };
  if (spec.uses_part()) add_tower("part", spec.part_tower, 3);
  if (spec.uses_body()) add_tower("body", spec.body_tower, 4);
  int width = static_cast<int>(feature_width(spec));
  for (std::size_t k = 0; k < spec.fully_connected.size(); ++k) {
    const std::string base = "fc" + std::to_string(k + 1);
    add(base + ".weight", {spec.fully_connected[k], width});
    add(base + ".bias", {spec.fully_connected[k]});
    width = spec.fully_connected[k];
  }
  add("detection.weight", {spec.detection_width(), width});
  add("detection.bias", {spec.detection_width()});
  add("localization.weight", {spec.localization_width(), width});
  add("localization.bias", {spec.localization_width()});
  return blocks;
}

NetworkParams::NetworkParams(LayerSpec spec)
    : spec_(std::move(spec)), blocks_(parameter_layout(spec_)) {
  values_.assign(blocks_.empty() ? 0 : blocks_.back().offset + blocks_.back().size, 0.0);
}

const ParamBlock& NetworkParams::block(std::string_view name) const {
  for (const ParamBlock& b : blocks_) {
    if (b.name == name) return b;
  }
  throw ShapeMismatch("no parameter block named '" + std::string(name) + "'");
}

std::span<double> NetworkParams::block_values(std::string_view name) {
  const ParamBlock& b = block(name);
  return std::span<double>(values_).subspan(b.offset, b.size);
}

std::span<const double> NetworkParams::block_values(std::string_view name) const {
  const ParamBlock& b = block(name);
  return std::span<const double>(values_).subspan(b.offset, b.size);
}

NetworkParams init_params(const LayerSpec& spec, std::uint64_t seed) {
  NetworkParams params(spec);
  Rng rng = make_rng(seed, stream::kInit);
  for (const ParamBlock& b : params.blocks()) {
    if (b.shape.size() < 2) continue;  // biases stay zero
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < b.shape.size(); ++d) fan_in *= static_cast<std::size_t>(b.shape[d]);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    auto values = params.values().subspan(b.offset, b.size);
    for (double& v : values) v = normal(rng);
  }
  return params;
}

std::vector<double> rasterize_mask(const Patch& part, const Patch& body, int size) {
  std::vector<double> mask(static_cast<std::size_t>(size) * size, 0.0);
  const double sx = body.w / size;
  const double sy = body.h / size;
  for (int v = 0; v < size; ++v) {
    const double y = body.top() + (v + 0.5) * sy;
    if (y < part.top() || y > part.bottom()) continue;
    for (int u = 0; u < size; ++u) {
      const double x = body.left() + (u + 0.5) * sx;
      if (x >= part.left() && x <= part.right()) {
        mask[static_cast<std::size_t>(v) * size + u] = 1.0;
      }
    }
  }
  if (std::find(mask.begin(), mask.end(), 1.0) == mask.end()) {
    // Parts thinner than a body pixel still mark the pixel holding their center.
    const auto clamp_cell = [size](double t) {
      return std::clamp(static_cast<int>(std::floor(t)), 0, size - 1);
    };
    const int u = clamp_cell((part.center.x - body.left()) / sx);
    const int v = clamp_cell((part.center.y - body.top()) / sy);
    mask[static_cast<std::size_t>(v) * size + u] = 1.0;
  }
  return mask;
}

DualInput build_inputs(const PixelBlock& part_pixels, const PixelBlock& body_pixels,
                       const Patch& part, const Patch& body) {
  if (part_pixels.size != body_pixels.size || part_pixels.channels != 3 ||
      body_pixels.channels != 3) {
    throw ShapeMismatch("dual input needs two RGB blocks of equal size");
  }
  DualInput input;
  input.size = part_pixels.size;
  input.part = part_pixels.values;
  input.body = body_pixels.values;
  const auto mask = rasterize_mask(part, body, input.size);
  input.body.insert(input.body.end(), mask.begin(), mask.end());
  return input;
}

DualInput make_dual_input(const Image& image, const PatchPair& pair, int size) {
  return build_inputs(resample_patch(image, pair.part, size),
                      resample_patch(image, pair.body, size), pair.part, pair.body);
}

namespace {

void im2col(const double* in, int channels, int h, int w, const ConvLayerSpec& layer,
            int out_h, int out_w, double* cols) {
  const int k = layer.kernel;
  const int pad = k / 2;
  const int s = layer.stride;
  const std::size_t hw = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const double* plane = in + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * s + ky - pad;
          double* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + out_w, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * w;
          if (s == 1) {
            // Valid columns form one contiguous run.
            const int lo = std::clamp(pad - kx, 0, out_w);
            const int hi = std::clamp(w + pad - kx, lo, out_w);
            std::fill(dst, dst + lo, 0.0);
            std::copy(src + lo + kx - pad, src + hi + kx - pad, dst + lo);
            std::fill(dst + hi, dst + out_w, 0.0);
            continue;
          }
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * s + kx - pad;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int channels, int h, int w, const ConvLayerSpec& layer,
            int out_h, int out_w, double* in_grad) {
  const int k = layer.kernel;
  const int pad = k / 2;
  const int s = layer.stride;
  const std::size_t hw = static_cast<std::size_t>(out_h) * out_w;
  std::fill(in_grad, in_grad + static_cast<std::size_t>(channels) * h * w, 0.0);
  for (int c = 0; c < channels; ++c) {
    double* plane = in_grad + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * s + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * out_w;
          double* dst = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * s + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

const double* conv_forward(const NetworkParams& params, const std::string& prefix,
                           const std::vector<ConvLayerSpec>& tower, const double* input,
                           int channels, int size, std::vector<ConvCache>& caches) {
  caches.resize(tower.size());
  int h = size, w = size;
  const double* x = input;
  for (std::size_t k = 0; k < tower.size(); ++k) {
    const ConvLayerSpec& layer = tower[k];
    ConvCache& cache = caches[k];
    const std::string base = prefix + ".conv" + std::to_string(k + 1);
    const auto weight = params.block_values(base + ".weight");
    const auto bias = params.block_values(base + ".bias");

    cache.in_channels = channels;
    cache.in_h = h;
    cache.in_w = w;
    cache.out_h = conv_extent(h, layer);
    cache.out_w = conv_extent(w, layer);
    const int rows = channels * layer.kernel * layer.kernel;
    const int hw = cache.out_h * cache.out_w;
    cache.cols.resize(static_cast<std::size_t>(rows) * hw);
    im2col(x, channels, h, w, layer, cache.out_h, cache.out_w, cache.cols.data());

    cache.activation.resize(static_cast<std::size_t>(layer.filters) * hw);
    MatrixMap act(cache.activation.data(), layer.filters, hw);
    act.noalias() = ConstMatrixMap(weight.data(), layer.filters, rows) *
                    ConstMatrixMap(cache.cols.data(), rows, hw);
    act.colwise() += ConstVectorMap(bias.data(), layer.filters);
    act = act.cwiseMax(0.0);

    if (layer.pool) {
      cache.pooled_h = cache.out_h / 2;
      cache.pooled_w = cache.out_w / 2;
      const std::size_t pooled = static_cast<std::size_t>(cache.pooled_h) * cache.pooled_w;
      cache.output.resize(static_cast<std::size_t>(layer.filters) * pooled);
      cache.pool_index.resize(cache.output.size());
      for (int f = 0; f < layer.filters; ++f) {
        const double* plane = cache.activation.data() + static_cast<std::size_t>(f) * hw;
        for (int py = 0; py < cache.pooled_h; ++py) {
          for (int px = 0; px < cache.pooled_w; ++px) {
            int best = (2 * py) * cache.out_w + 2 * px;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                const int idx = (2 * py + dy) * cache.out_w + 2 * px + dx;
                if (plane[idx] > plane[best]) best = idx;
              }
            }
            const std::size_t o = f * pooled + static_cast<std::size_t>(py) * cache.pooled_w + px;
            cache.output[o] = plane[best];
            cache.pool_index[o] = best;
          }
        }
      }
    } else {
      cache.pooled_h = cache.out_h;
      cache.pooled_w = cache.out_w;
      cache.output = cache.activation;
      cache.pool_index.clear();
    }
    x = cache.output.data();
    channels = layer.filters;
    h = cache.pooled_h;
    w = cache.pooled_w;
  }
  return x;
}

// `grad_out` holds d(loss)/d(tower output) and is consumed.
void conv_backward(const NetworkParams& params, const std::string& prefix,
                   const std::vector<ConvLayerSpec>& tower, std::vector<ConvCache>& caches,
                   std::vector<double>& grad_out, std::vector<double>& grad_in,
                   std::vector<double>& grad_cols, std::span<double> gradient) {
  for (std::size_t k = tower.size(); k-- > 0;) {
    const ConvLayerSpec& layer = tower[k];
    ConvCache& cache = caches[k];
    const std::string base = prefix + ".conv" + std::to_string(k + 1);
    const ParamBlock& wb = params.block(base + ".weight");
    const ParamBlock& bb = params.block(base + ".bias");
    const int rows = cache.in_channels * layer.kernel * layer.kernel;
    const int hw = cache.out_h * cache.out_w;

    // d(loss)/d(pre-activation), F x hw.
    grad_in.assign(static_cast<std::size_t>(layer.filters) * hw, 0.0);
    if (layer.pool) {
      const std::size_t pooled = static_cast<std::size_t>(cache.pooled_h) * cache.pooled_w;
      for (int f = 0; f < layer.filters; ++f) {
        for (std::size_t o = 0; o < pooled; ++o) {
          const std::size_t src = f * pooled + o;
          grad_in[static_cast<std::size_t>(f) * hw + cache.pool_index[src]] += grad_out[src];
        }
      }
    } else {
      std::copy(grad_out.begin(), grad_out.end(), grad_in.begin());
    }
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
      if (cache.activation[i] <= 0.0) grad_in[i] = 0.0;
    }

    ConstMatrixMap delta(grad_in.data(), layer.filters, hw);
    ConstMatrixMap cols(cache.cols.data(), rows, hw);
    MatrixMap(gradient.data() + wb.offset, layer.filters, rows).noalias() +=
        delta * cols.transpose();
    // Plain loop: Eigen's vectorized reduction peels by alignment, which
    // would make the sum order depend on where the buffer landed.
    for (int f = 0; f < layer.filters; ++f) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < hw; ++i) sum += delta(f, i);
      gradient[bb.offset + static_cast<std::size_t>(f)] += sum;
    }

    if (k == 0) break;
    const auto weight = params.block_values(base + ".weight");
    grad_cols.resize(static_cast<std::size_t>(rows) * hw);
    MatrixMap(grad_cols.data(), rows, hw).noalias() =
        ConstMatrixMap(weight.data(), layer.filters, rows).transpose() * delta;
    grad_out.resize(static_cast<std::size_t>(cache.in_channels) * cache.in_h * cache.in_w);
    col2im(grad_cols.data(), cache.in_channels, cache.in_h, cache.in_w, layer, cache.out_h,
           cache.out_w, grad_out.data());
  }
}

void check_input(const LayerSpec& spec, const DualInput& input) {
  const std::size_t plane = static_cast<std::size_t>(spec.input_size) * spec.input_size;
  if (input.size != spec.input_size || input.part.size() != 3 * plane ||
      input.body.size() != 4 * plane) {
    throw ShapeMismatch("input does not match the network input size " +
                        std::to_string(spec.input_size));
  }
}

}  // namespace

NetOutput forward(const NetworkParams& params, const DualInput& input, ForwardCache& cache) {
  const LayerSpec& spec = params.spec();
  if (params.size() == 0) throw ShapeMismatch("parameters are empty");
  check_input(spec, input);
  cache.input = &input;

  cache.features.clear();
  if (spec.uses_part()) {
    const double* out = conv_forward(params, "part", spec.part_tower, input.part.data(), 3,
                                     spec.input_size, cache.part);
    cache.features.insert(cache.features.end(), out, out + cache.part.back().output.size());
  }
  if (spec.uses_body()) {
    const double* out = conv_forward(params, "body", spec.body_tower, input.body.data(), 4,
                                     spec.input_size, cache.body);
    cache.features.insert(cache.features.end(), out, out + cache.body.back().output.size());
  }

  cache.hidden.resize(spec.fully_connected.size());
  const std::vector<double>* x = &cache.features;
  for (std::size_t k = 0; k < spec.fully_connected.size(); ++k) {
    const std::string base = "fc" + std::to_string(k + 1);
    const auto weight = params.block_values(base + ".weight");
    const auto bias = params.block_values(base + ".bias");
    const int out = spec.fully_connected[k];
    const int in = static_cast<int>(x->size());
    if (weight.size() != static_cast<std::size_t>(out) * in) {
      throw ShapeMismatch(base + " weight does not match its input width");
    }
    auto& h = cache.hidden[k];
    h.resize(static_cast<std::size_t>(out));
    VectorMap hv(h.data(), out);
    hv.noalias() = ConstMatrixMap(weight.data(), out, in) * ConstVectorMap(x->data(), in);
    hv += ConstVectorMap(bias.data(), out);
    hv = hv.cwiseMax(0.0);
    x = &h;
  }

  const int width = static_cast<int>(x->size());
  const ConstVectorMap last(x->data(), width);
  NetOutput& result = cache.output;
  const int classes = spec.detection_width();
  result.likelihoods.resize(static_cast<std::size_t>(classes));
  VectorMap logits(result.likelihoods.data(), classes);
  logits.noalias() = ConstMatrixMap(params.block_values("detection.weight").data(), classes, width) * last;
  logits += ConstVectorMap(params.block_values("detection.bias").data(), classes);
  const double peak = logits.maxCoeff();
  double total = 0.0;
  for (double& v : result.likelihoods) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : result.likelihoods) v /= total;

  const int outputs = spec.localization_width();
  result.locations.resize(static_cast<std::size_t>(outputs));
  VectorMap z(result.locations.data(), outputs);
  z.noalias() = ConstMatrixMap(params.block_values("localization.weight").data(), outputs, width) * last;
  z += ConstVectorMap(params.block_values("localization.bias").data(), outputs);
  return result;
}

NetOutput forward(const NetworkParams& params, const DualInput& input) {
  ForwardCache cache;
  return forward(params, input, cache);
}

void backward(const NetworkParams& params, ForwardCache& cache, const OutputGradient& grad,
              std::span<double> gradient) {
  const LayerSpec& spec = params.spec();
  if (gradient.size() != params.size()) throw ShapeMismatch("gradient buffer has the wrong size");
  if (grad.logits.size() != static_cast<std::size_t>(spec.detection_width()) ||
      grad.locations.size() != static_cast<std::size_t>(spec.localization_width())) {
    throw ShapeMismatch("output gradient does not match the network heads");
  }
  const std::vector<double>& last =
      spec.fully_connected.empty() ? cache.features : cache.hidden.back();
  const int width = static_cast<int>(last.size());
  const ConstVectorMap h(last.data(), width);
  const ConstVectorMap dlogits(grad.logits.data(), spec.detection_width());
  const ConstVectorMap dz(grad.locations.data(), spec.localization_width());

  auto head = [&](const char* name, const ConstVectorMap& delta) {
    const ParamBlock& wb = params.block(std::string(name) + ".weight");
    const ParamBlock& bb = params.block(std::string(name) + ".bias");
    const auto rows = static_cast<Eigen::Index>(delta.size());
    MatrixMap(gradient.data() + wb.offset, rows, width).noalias() += delta * h.transpose();
    VectorMap(gradient.data() + bb.offset, rows) += delta;
  };
  head("detection", dlogits);
  head("localization", dz);

  // d(loss)/d(last shared activation).
  std::vector<double>& upstream = cache.grad_a;
  upstream.resize(static_cast<std::size_t>(width));
  VectorMap dh(upstream.data(), width);
  dh.noalias() = ConstMatrixMap(params.block_values("detection.weight").data(),
                                spec.detection_width(), width).transpose() * dlogits;
  dh.noalias() += ConstMatrixMap(params.block_values("localization.weight").data(),
                                 spec.localization_width(), width).transpose() * dz;

  for (std::size_t k = spec.fully_connected.size(); k-- > 0;) {
    const std::string base = "fc" + std::to_string(k + 1);
    const std::vector<double>& out = cache.hidden[k];
    const std::vector<double>& in = k == 0 ? cache.features : cache.hidden[k - 1];
    const int rows = static_cast<int>(out.size());
    const int cols = static_cast<int>(in.size());
    for (int i = 0; i < rows; ++i) {
      if (out[static_cast<std::size_t>(i)] <= 0.0) upstream[static_cast<std::size_t>(i)] = 0.0;
    }
    const ConstVectorMap delta(upstream.data(), rows);
    const ParamBlock& wb = params.block(base + ".weight");
    const ParamBlock& bb = params.block(base + ".bias");
    MatrixMap(gradient.data() + wb.offset, rows, cols).noalias() +=
        delta * ConstVectorMap(in.data(), cols).transpose();
    VectorMap(gradient.data() + bb.offset, rows) += delta;

    cache.grad_b.resize(static_cast<std::size_t>(cols));
    VectorMap(cache.grad_b.data(), cols).noalias() =
        ConstMatrixMap(params.block_values(base + ".weight").data(), rows, cols).transpose() * delta;
    std::swap(cache.grad_a, cache.grad_b);
  }

  // cache.grad_a now holds d(loss)/d(features); split it between the towers.
  std::vector<double> features_grad = std::move(cache.grad_a);
  std::size_t offset = 0;
  std::vector<double> tower_grad;
  if (spec.uses_part()) {
    const std::size_t n = cache.part.back().output.size();
    tower_grad.assign(features_grad.begin(), features_grad.begin() + static_cast<long>(n));
    conv_backward(params, "part", spec.part_tower, cache.part, tower_grad, cache.grad_b,
                  cache.grad_cols, gradient);
    offset = n;
  }
  if (spec.uses_body()) {
    const std::size_t n = cache.body.back().output.size();
    tower_grad.assign(features_grad.begin() + static_cast<long>(offset),
                      features_grad.begin() + static_cast<long>(offset + n));
    conv_backward(params, "body", spec.body_tower, cache.body, tower_grad, cache.grad_b,
                  cache.grad_cols, gradient);
  }
  cache.grad_a = std::move(features_grad);
}

}  // namespace dspose
