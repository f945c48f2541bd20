#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dspose/checkpoint.hpp"
#include "dspose/image.hpp"
#include "dspose/labeling.hpp"
#include "dspose/network.hpp"
#include "dspose/sampling.hpp"

namespace dspose {

struct TrainConfig {
  double lambda_d = 4.0;         // weight of the detection loss
  double learning_rate = 0.01;   // initial step
  int decay_every = 10;          // epochs between learning-rate decays
  double decay_factor = 0.1;
  int batch_size = 32;
  int epochs = 20;               // total epochs, including resumed ones
  double momentum = 0.0;
  int checkpoint_every = 0;      // epochs; 0 disables periodic checkpoints
  std::uint64_t seed = 0;

  void validate() const;
};

// Learning rate in effect during (0-based) `epoch`.
double learning_rate_at(const TrainConfig& cfg, int epoch);

// -log l_{i*}.
double detection_loss(std::span<const double> likelihoods, int label);

// ||z_{i*} - j_{i*}||^2 for foreground labels, 0 for background.
double localization_loss(std::span<const double> locations, const PatchLabel& label);

struct LossBreakdown {
  double detection = 0.0;
  double localization = 0.0;

  double total(double lambda_d) const { return lambda_d * detection + localization; }
};

// Sums of both loss terms over a batch.
LossBreakdown loss_terms(std::span<const NetOutput> outputs, std::span<const PatchLabel> labels);

// sum over samples of lambda_d C_d + C_r.
double total_loss(std::span<const NetOutput> outputs, std::span<const PatchLabel> labels,
                  double lambda_d);

// Gradient of lambda_d C_d + C_r with respect to the logits and locations.
OutputGradient loss_gradient(const NetOutput& output, const PatchLabel& label, double lambda_d);

// Random-access training samples. input() must be safe to call concurrently.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual DualInput input(std::size_t i) const = 0;
  virtual const PatchLabel& label(std::size_t i) const = 0;
};

// Samples held as ready-made inputs.
class InMemorySamples final : public SampleSource {
 public:
  void add(DualInput input, PatchLabel label);
  std::size_t size() const override { return inputs_.size(); }
  DualInput input(std::size_t i) const override { return inputs_[i]; }
  const PatchLabel& label(std::size_t i) const override { return labels_[i]; }

 private:
  std::vector<DualInput> inputs_;
  std::vector<PatchLabel> labels_;
};

struct IndexedPair {
  std::size_t image = 0;
  LabeledPair pair;
};

// Patch pairs over a set of images; inputs are resampled on demand.
class PatchPairSamples final : public SampleSource {
 public:
  PatchPairSamples(std::span<const Image> images, std::vector<IndexedPair> pairs, int input_size);

  std::size_t size() const override { return pairs_.size(); }
  DualInput input(std::size_t i) const override;
  const PatchLabel& label(std::size_t i) const override { return pairs_[i].pair.label; }
  const IndexedPair& pair(std::size_t i) const { return pairs_[i]; }

 private:
  std::span<const Image> images_;
  std::vector<IndexedPair> pairs_;
  int input_size_;
};

// Proposal stub -> part/body filters -> random pairing -> background cap, per
// image. Images without a valid pair are skipped.
std::vector<IndexedPair> build_patch_pairs(std::span<const Image> images,
                                           std::span<const Pose> poses, TorsoPair torso,
                                           const SamplingConfig& cfg);

struct EpochStats {
  int epoch = 0;  // 1-based
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  double detection = 0.0;     // mean C_d
  double localization = 0.0;  // mean C_r
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&, const Checkpoint&)>;

// Minibatch SGD on the combined loss, continuing from start.state.epochs_completed
// up to cfg.epochs. The step uses the batch-mean gradient. Results are
// bit-identical for a given seed regardless of the thread count. Throws
// Divergence if the loss becomes non-finite.
TrainResult train(const SampleSource& samples, Checkpoint start, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Network outputs for every sample, in order.
std::vector<NetOutput> evaluate_samples(const NetworkParams& params, const SampleSource& samples);

}  // namespace dspose
