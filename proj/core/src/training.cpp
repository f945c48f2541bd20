#include "dspose/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dspose/error.hpp"
#include "dspose/parallel.hpp"
#include "dspose/random.hpp"

namespace dspose {

namespace {

// Samples per gradient chunk. Chunks are the unit of parallel work and are
// reduced in index order, which keeps results independent of the thread count.
constexpr std::size_t kChunk = 4;

}  // namespace

void TrainConfig::validate() const {
  if (!(lambda_d > 0.0)) throw ConfigError("lambda_d must be > 0");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (decay_every < 1) throw ConfigError("decay_every must be >= 1");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("decay_factor must be in (0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
  return cfg.learning_rate * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

double detection_loss(std::span<const double> likelihoods, int label) {
  return -std::log(likelihoods[static_cast<std::size_t>(label)]);
}

double localization_loss(std::span<const double> locations, const PatchLabel& label) {
  if (label.background() || !label.target) return 0.0;
  const auto k = static_cast<std::size_t>(2 * (label.joint - 1));
  const double dx = locations[k] - label.target->x;
  const double dy = locations[k + 1] - label.target->y;
  return dx * dx + dy * dy;
}

LossBreakdown loss_terms(std::span<const NetOutput> outputs, std::span<const PatchLabel> labels) {
  if (outputs.size() != labels.size()) throw ShapeMismatch("outputs and labels differ in length");
  LossBreakdown sum;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    sum.detection += detection_loss(outputs[i].likelihoods, labels[i].joint);
    sum.localization += localization_loss(outputs[i].locations, labels[i]);
  }
  return sum;
}

double total_loss(std::span<const NetOutput> outputs, std::span<const PatchLabel> labels,
                  double lambda_d) {
  return loss_terms(outputs, labels).total(lambda_d);
}

OutputGradient loss_gradient(const NetOutput& output, const PatchLabel& label, double lambda_d) {
  OutputGradient g;
  g.logits.resize(output.likelihoods.size());
  for (std::size_t c = 0; c < g.logits.size(); ++c) {
    const double target = static_cast<int>(c) == label.joint ? 1.0 : 0.0;
    g.logits[c] = lambda_d * (output.likelihoods[c] - target);
  }
  g.locations.assign(output.locations.size(), 0.0);
  if (!label.background() && label.target) {
    const auto k = static_cast<std::size_t>(2 * (label.joint - 1));
    g.locations[k] = 2.0 * (output.locations[k] - label.target->x);
    g.locations[k + 1] = 2.0 * (output.locations[k + 1] - label.target->y);
  }
  return g;
}

void InMemorySamples::add(DualInput input, PatchLabel label) {
  inputs_.push_back(std::move(input));
  labels_.push_back(std::move(label));
}

PatchPairSamples::PatchPairSamples(std::span<const Image> images, std::vector<IndexedPair> pairs,
                                   int input_size)
    : images_(images), pairs_(std::move(pairs)), input_size_(input_size) {
  for (const auto& p : pairs_) {
    if (p.image >= images_.size()) throw ShapeMismatch("patch pair refers to a missing image");
  }
}

DualInput PatchPairSamples::input(std::size_t i) const {
  const IndexedPair& p = pairs_[i];
  return make_dual_input(images_[p.image], p.pair.pair, input_size_);
}

std::vector<IndexedPair> build_patch_pairs(std::span<const Image> images,
                                           std::span<const Pose> poses, TorsoPair torso,
                                           const SamplingConfig& cfg) {
  cfg.validate();
  if (images.size() != poses.size()) throw ShapeMismatch("images and poses differ in length");
  std::vector<std::vector<IndexedPair>> per_image(images.size());
  parallel_for(images.size(), [&](std::size_t i) {
    const Pose& pose = poses[i];
    const double d = torso_diameter(pose, torso);
    if (!(d > 0.0)) return;
    const ImageSize size{images[i].width(), images[i].height()};
    const auto parts = filter_part_patches(stub_proposals(size, pose, d, cfg, i), d, cfg);
    const auto bodies = filter_body_patches(stub_body_proposals(size, pose, d, cfg, i), pose);
    if (parts.empty() || bodies.empty()) return;
    std::vector<LabeledPair> pairs;
    try {
      pairs = build_training_pairs(parts, bodies, pose, derive_seed(cfg.seed, stream::kPairing, i));
    } catch (const NoValidPairs&) {
      return;
    }
    cap_background(pairs, pose.size(), derive_seed(cfg.seed, stream::kBackground, i));
    for (auto& p : pairs) per_image[i].push_back(IndexedPair{i, std::move(p)});
  });
  std::vector<IndexedPair> all;
  for (auto& v : per_image) all.insert(all.end(), v.begin(), v.end());
  return all;
}

TrainResult train(const SampleSource& samples, Checkpoint start, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  TrainResult result{std::move(start), {}};
  NetworkParams& params = result.checkpoint.params;
  TrainingState& state = result.checkpoint.state;
  const std::size_t n = samples.size();
  const std::size_t p = params.size();
  if (cfg.momentum > 0.0 && state.velocity.size() != p) state.velocity.assign(p, 0.0);
  if (cfg.momentum == 0.0) state.velocity.clear();

  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t chunks_per_batch = (batch + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> chunk_grad(chunks_per_batch, std::vector<double>(p));
  std::vector<LossBreakdown> chunk_loss(chunks_per_batch);
  std::vector<ForwardCache> caches(chunks_per_batch);
  std::vector<double> grad(p);

  for (int epoch = state.epochs_completed; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate_at(cfg, epoch);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(cfg.seed, stream::kShuffle, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    LossBreakdown epoch_loss;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(n, begin + batch);
      const std::size_t chunks = (end - begin + kChunk - 1) / kChunk;
      parallel_for(chunks, [&](std::size_t c) {
        auto& g = chunk_grad[c];
        std::fill(g.begin(), g.end(), 0.0);
        LossBreakdown loss;
        const std::size_t lo = begin + c * kChunk;
        const std::size_t hi = std::min(end, lo + kChunk);
        for (std::size_t k = lo; k < hi; ++k) {
          const std::size_t s = order[k];
          const DualInput input = samples.input(s);
          const PatchLabel& label = samples.label(s);
          const NetOutput out = forward(params, input, caches[c]);
          loss.detection += detection_loss(out.likelihoods, label.joint);
          loss.localization += localization_loss(out.locations, label);
          backward(params, caches[c], loss_gradient(out, label, cfg.lambda_d), g);
        }
        chunk_loss[c] = loss;
      });

      std::fill(grad.begin(), grad.end(), 0.0);
      LossBreakdown batch_loss;
      for (std::size_t c = 0; c < chunks; ++c) {
        const auto& g = chunk_grad[c];
        for (std::size_t i = 0; i < p; ++i) grad[i] += g[i];
        batch_loss.detection += chunk_loss[c].detection;
        batch_loss.localization += chunk_loss[c].localization;
      }
      const double total = batch_loss.total(cfg.lambda_d);
      if (!std::isfinite(total)) throw Divergence(epoch + 1, total);
      epoch_loss.detection += batch_loss.detection;
      epoch_loss.localization += batch_loss.localization;

      const double scale = lr / static_cast<double>(end - begin);
      auto theta = params.values();
      if (cfg.momentum > 0.0) {
        for (std::size_t i = 0; i < p; ++i) {
          state.velocity[i] = cfg.momentum * state.velocity[i] - scale * grad[i];
          theta[i] += state.velocity[i];
        }
      } else {
        for (std::size_t i = 0; i < p; ++i) theta[i] -= scale * grad[i];
      }
    }

    state.epochs_completed = epoch + 1;
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.learning_rate = lr;
    const double count = n == 0 ? 1.0 : static_cast<double>(n);
    stats.detection = epoch_loss.detection / count;
    stats.localization = epoch_loss.localization / count;
    stats.mean_loss = epoch_loss.total(cfg.lambda_d) / count;
    if (!std::isfinite(stats.mean_loss)) throw Divergence(stats.epoch, stats.mean_loss);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats, result.checkpoint);
  }
  return result;
}

std::vector<NetOutput> evaluate_samples(const NetworkParams& params, const SampleSource& samples) {
  std::vector<NetOutput> outputs(samples.size());
  const std::size_t chunks = (samples.size() + 63) / 64;
  parallel_for(chunks, [&](std::size_t c) {
    ForwardCache cache;
    const std::size_t hi = std::min(samples.size(), (c + 1) * 64);
    for (std::size_t i = c * 64; i < hi; ++i) {
      const DualInput input = samples.input(i);
      outputs[i] = forward(params, input, cache);
    }
  });
  return outputs;
}

}  // namespace dspose
