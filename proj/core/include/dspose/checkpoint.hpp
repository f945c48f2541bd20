#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dspose/network.hpp"

namespace dspose {

// Optimizer progress stored next to the parameters so training can resume.
struct TrainingState {
  int epochs_completed = 0;
  std::vector<double> velocity;  // momentum buffer; empty when momentum is off

  friend bool operator==(const TrainingState&, const TrainingState&) = default;
};

struct Checkpoint {
  NetworkParams params;
  TrainingState state;
};

// Binary container:
//   "DSPOSECK" | u32 version | u64 header bytes | JSON header
//   | u64 count | count x f64 parameters | u64 count | count x f64 velocity
// Integers and doubles are little-endian; doubles are stored bit-exactly.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// JSON encoding of a LayerSpec, shared with config and manifest files.
std::string layer_spec_to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const std::string& text);

}  // namespace dspose
