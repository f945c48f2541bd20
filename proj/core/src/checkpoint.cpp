#include "dspose/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "dspose/error.hpp"
#include "json.hpp"

namespace dspose {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'S', 'P', 'O', 'S', 'E', 'C', 'K'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated checkpoint: " + path.string());
  return to_little(v);
}

void put_doubles(std::ostream& out, const std::vector<double>& values) {
  put<std::uint64_t>(out, values.size());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) put(out, v);
  }
}

std::vector<double> get_doubles(std::istream& in, const std::filesystem::path& path) {
  const auto count = get<std::uint64_t>(in, path);
  if (count > (std::uint64_t{1} << 34)) throw IoError("implausible array size in " + path.string());
  std::vector<double> values(count);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint: " + path.string());
  } else {
    for (double& v : values) v = get<double>(in, path);
  }
  return values;
}

json conv_to_json(const std::vector<ConvLayerSpec>& tower) {
  json layers = json::array();
  for (const auto& l : tower) {
    layers.push_back({{"filters", l.filters}, {"kernel", l.kernel}, {"stride", l.stride},
                      {"pool", l.pool}});
  }
  return layers;
}

std::vector<ConvLayerSpec> conv_from_json(const json& layers) {
  std::vector<ConvLayerSpec> tower;
  for (const auto& l : layers) {
    tower.push_back(ConvLayerSpec{l.at("filters").get<int>(), l.at("kernel").get<int>(),
                                  l.at("stride").get<int>(), l.at("pool").get<bool>()});
  }
  return tower;
}

json spec_json(const LayerSpec& spec) {
  return json{{"input_size", spec.input_size},
              {"joints", spec.joints},
              {"towers", std::string(to_string(spec.towers))},
              {"part_tower", conv_to_json(spec.part_tower)},
              {"body_tower", conv_to_json(spec.body_tower)},
              {"fully_connected", spec.fully_connected}};
}

LayerSpec spec_from(const json& j) {
  LayerSpec spec;
  spec.input_size = j.at("input_size").get<int>();
  spec.joints = j.at("joints").get<int>();
  spec.towers = parse_tower_mode(j.at("towers").get<std::string>());
  spec.part_tower = conv_from_json(j.at("part_tower"));
  spec.body_tower = conv_from_json(j.at("body_tower"));
  spec.fully_connected = j.at("fully_connected").get<std::vector<int>>();
  return spec;
}

}  // namespace

std::string layer_spec_to_json(const LayerSpec& spec) { return spec_json(spec).dump(); }

LayerSpec layer_spec_from_json(const std::string& text) {
  try {
    return spec_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ShapeMismatch(std::string("invalid layer spec: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  json header;
  header["spec"] = spec_json(checkpoint.params.spec());
  json blocks = json::array();
  for (const ParamBlock& b : checkpoint.params.blocks()) {
    blocks.push_back({{"name", b.name}, {"shape", b.shape}, {"offset", b.offset}});
  }
  header["blocks"] = std::move(blocks);
  header["epochs_completed"] = checkpoint.state.epochs_completed;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto values = checkpoint.params.values();
  put_doubles(out, std::vector<double>(values.begin(), values.end()));
  put_doubles(out, checkpoint.state.velocity);
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a checkpoint file: " + path.string());
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_size = get<std::uint64_t>(in, path);
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw IoError("truncated checkpoint: " + path.string());

  json header;
  LayerSpec spec;
  int epochs = 0;
  try {
    header = json::parse(text);
    spec = spec_from(header.at("spec"));
    epochs = header.value("epochs_completed", 0);
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }

  Checkpoint checkpoint{NetworkParams(spec), TrainingState{epochs, {}}};
  const auto& blocks = checkpoint.params.blocks();
  const json& stored = header.at("blocks");
  if (stored.size() != blocks.size()) throw ShapeMismatch("checkpoint layout differs from spec");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (stored[i].at("name").get<std::string>() != blocks[i].name ||
        stored[i].at("shape").get<std::vector<int>>() != blocks[i].shape) {
      throw ShapeMismatch("checkpoint block " + blocks[i].name + " has an unexpected shape");
    }
  }
  const auto values = get_doubles(in, path);
  if (values.size() != checkpoint.params.size()) {
    throw ShapeMismatch("checkpoint parameter count does not match its spec");
  }
  std::copy(values.begin(), values.end(), checkpoint.params.values().begin());
  checkpoint.state.velocity = get_doubles(in, path);
  if (!checkpoint.state.velocity.empty() && checkpoint.state.velocity.size() != values.size()) {
    throw ShapeMismatch("checkpoint velocity size does not match parameters");
  }
  return checkpoint;
}

}  // namespace dspose
