#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dspose/inference.hpp"
#include "dspose/network.hpp"
#include "dspose/synth.hpp"
#include "dspose/training.hpp"

using namespace dspose;

namespace {

DualInput random_input(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DualInput in;
  in.size = n;
  in.part.resize(3 * static_cast<std::size_t>(n) * n);
  in.body.resize(4 * static_cast<std::size_t>(n) * n);
  for (double& v : in.part) v = u(rng);
  for (double& v : in.body) v = u(rng);
  return in;
}

void BM_Forward(benchmark::State& state) {
  const auto mode = static_cast<TowerMode>(state.range(0));
  const NetworkParams params = init_params(LayerSpec::desk_default(14, mode), 1);
  const DualInput input = random_input(params.spec().input_size, 2);
  ForwardCache cache;
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, input, cache));
  state.SetLabel(std::string(to_string(mode)));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
  const NetworkParams params = init_params(LayerSpec::desk_default(14), 1);
  const DualInput input = random_input(params.spec().input_size, 2);
  const PatchLabel label{3, NormalizedJoint{0.1, -0.2}};
  std::vector<double> grad(params.size());
  ForwardCache cache;
  for (auto _ : state) {
    const NetOutput out = forward(params, input, cache);
    backward(params, cache, loss_gradient(out, label, 4.0), grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_ResamplePatch(benchmark::State& state) {
  const Figure f = generate_figure(FigureConfig::lsp_default(), 0);
  const Patch patch{40.0, 40.0, {30.3, 33.7}};
  for (auto _ : state) benchmark::DoNotOptimize(resample_patch(f.image, patch, 32));
}
BENCHMARK(BM_ResamplePatch)->Unit(benchmark::kMicrosecond);

void BM_BuildHeatmaps(benchmark::State& state) {
  const Figure f = generate_figure(FigureConfig::lsp_default(), 0);
  const auto pairs = window_pairs({64, 64}, 20.0, SamplingConfig{});
  const auto outputs = oracle_evaluator(f.pose)(pairs);
  std::vector<PatchResult> results;
  for (std::size_t i = 0; i < pairs.size(); ++i) results.push_back({pairs[i], outputs[i]});
  for (auto _ : state) benchmark::DoNotOptimize(build_heatmaps(results, 64, 64, InferenceConfig{}));
  state.counters["patches"] = static_cast<double>(results.size());
}
BENCHMARK(BM_BuildHeatmaps)->Unit(benchmark::kMicrosecond);

void BM_FusePose(benchmark::State& state) {
  const Figure f = generate_figure(FigureConfig::lsp_default(), 0);
  const auto pairs = window_pairs({64, 64}, 20.0, SamplingConfig{});
  const auto outputs = oracle_evaluator(f.pose)(pairs);
  std::vector<PatchResult> results;
  for (std::size_t i = 0; i < pairs.size(); ++i) results.push_back({pairs[i], outputs[i]});
  for (auto _ : state) benchmark::DoNotOptimize(fuse_pose(results, 64, 64, InferenceConfig{}));
}
BENCHMARK(BM_FusePose)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
