#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dspose/inference.hpp"
#include "dspose/network.hpp"
#include "dspose/sampling.hpp"
#include "dspose/synth.hpp"
#include "dspose/training.hpp"

namespace dspose {

// Everything a pipeline run needs. The text form is one `key = value` per
// line; `#` starts a comment. Unknown keys are rejected.
struct RunConfig {
  SamplingConfig sampling;
  TrainConfig train;
  InferenceConfig inference;
  FigureConfig figure = FigureConfig::lsp_default();
  LayerSpec network = LayerSpec::desk_default(14);
  int count = 100;  // figures generated by `synth`
  std::uint64_t seed = 0;

  // Applies one key; throws ConfigError naming the key on failure.
  void set(std::string_view key, std::string_view value);
  // Propagates `seed` into every sub-config.
  void set_seed(std::uint64_t value);
  // Throws ConfigError if any sub-config invariant fails.
  void validate() const;
  std::string to_text() const;
};

RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// "8@5x5+pool,16@5x5/s2" style tower description.
std::vector<ConvLayerSpec> parse_tower(std::string_view text);
std::string format_tower(const std::vector<ConvLayerSpec>& tower);

}  // namespace dspose
