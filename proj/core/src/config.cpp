#include "dspose/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dspose/error.hpp"

namespace dspose {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view value) {
  std::vector<T> out;
  for (auto item : split(value, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

// Shortest text that parses back to the same value.
template <typename T>
std::string num(T value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + num(values[i]);
  return out;
}

}  // namespace

std::vector<ConvLayerSpec> parse_tower(std::string_view text) {
  std::vector<ConvLayerSpec> tower;
  for (auto item : split(text, ',')) {
    ConvLayerSpec layer;
    std::string_view rest = item;
    if (const auto plus = rest.find("+pool"); plus != std::string_view::npos) {
      if (plus + 5 != rest.size()) throw ConfigError("'+pool' must end a layer: " + std::string(item));
      layer.pool = true;
      rest = rest.substr(0, plus);
    }
    if (const auto slash = rest.find("/s"); slash != std::string_view::npos) {
      layer.stride = parse_number<int>("tower stride", rest.substr(slash + 2));
      rest = rest.substr(0, slash);
    }
    const auto at = rest.find('@');
    const auto x = rest.find('x', at == std::string_view::npos ? 0 : at);
    if (at == std::string_view::npos || x == std::string_view::npos) {
      throw ConfigError("layer must look like 8@5x5: " + std::string(item));
    }
    layer.filters = parse_number<int>("tower filters", rest.substr(0, at));
    layer.kernel = parse_number<int>("tower kernel", rest.substr(at + 1, x - at - 1));
    if (parse_number<int>("tower kernel", rest.substr(x + 1)) != layer.kernel) {
      throw ConfigError("only square kernels are supported: " + std::string(item));
    }
    tower.push_back(layer);
  }
  return tower;
}

std::string format_tower(const std::vector<ConvLayerSpec>& tower) {
  std::ostringstream out;
  for (std::size_t i = 0; i < tower.size(); ++i) {
    const auto& l = tower[i];
    out << (i ? "," : "") << l.filters << '@' << l.kernel << 'x' << l.kernel;
    if (l.stride != 1) out << "/s" << l.stride;
    if (l.pool) out << "+pool";
  }
  return out.str();
}

void RunConfig::set_seed(std::uint64_t value) {
  seed = value;
  sampling.seed = value;
  train.seed = value;
  figure.seed = value;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k(key);
  // sampling
  if (key == "mu1") sampling.mu1 = parse_number<double>(key, value);
  else if (key == "mu2") sampling.mu2 = parse_number<double>(key, value);
  else if (key == "window_scales") sampling.window_scales = parse_list<double>(key, value);
  else if (key == "stride") sampling.stride = parse_number<double>(key, value);
  else if (key == "proposal_count") sampling.proposal_count = parse_number<int>(key, value);
  else if (key == "body_proposal_count") sampling.body_proposal_count = parse_number<int>(key, value);
  // training
  else if (key == "lambda_d") train.lambda_d = parse_number<double>(key, value);
  else if (key == "learning_rate") train.learning_rate = parse_number<double>(key, value);
  else if (key == "decay_every") train.decay_every = parse_number<int>(key, value);
  else if (key == "decay_factor") train.decay_factor = parse_number<double>(key, value);
  else if (key == "batch_size") train.batch_size = parse_number<int>(key, value);
  else if (key == "epochs") train.epochs = parse_number<int>(key, value);
  else if (key == "momentum") train.momentum = parse_number<double>(key, value);
  else if (key == "checkpoint_every") train.checkpoint_every = parse_number<int>(key, value);
  // inference
  else if (key == "k") inference.k = parse_number<int>(key, value);
  else if (key == "lambda_h") inference.lambda_h = parse_number<double>(key, value);
  else if (key == "background_competes") inference.background_competes = parse_bool(key, value);
  // synthetic figures
  else if (key == "count") count = parse_number<int>(key, value);
  else if (key == "image_width") figure.width = parse_number<int>(key, value);
  else if (key == "image_height") figure.height = parse_number<int>(key, value);
  else if (key == "noise") figure.noise = parse_number<double>(key, value);
  else if (key == "clutter_count") figure.clutter_count = parse_number<int>(key, value);
  else if (key == "scale_min") figure.scale_min = parse_number<double>(key, value);
  else if (key == "scale_max") figure.scale_max = parse_number<double>(key, value);
  else if (key == "lean_range") figure.lean_range = parse_number<double>(key, value);
  // network
  else if (key == "input_size") network.input_size = parse_number<int>(key, value);
  else if (key == "towers") network.towers = parse_tower_mode(value);
  else if (key == "part_tower") network.part_tower = parse_tower(value);
  else if (key == "body_tower") network.body_tower = parse_tower(value);
  else if (key == "fully_connected") network.fully_connected = parse_list<int>(key, value);
  // global
  else if (key == "seed") set_seed(parse_number<std::uint64_t>(key, value));
  else throw ConfigError("unknown configuration key '" + k + "'");
}

void RunConfig::validate() const {
  sampling.validate();
  train.validate();
  figure.validate();
  network.validate();
  inference.validate(network.joints);
  if (count < 0) throw ConfigError("count must be >= 0");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "seed = " << seed << '\n'
      << "mu1 = " << num(sampling.mu1) << '\n'
      << "mu2 = " << num(sampling.mu2) << '\n'
      << "window_scales = " << join(sampling.window_scales) << '\n'
      << "stride = " << num(sampling.stride) << '\n'
      << "proposal_count = " << sampling.proposal_count << '\n'
      << "body_proposal_count = " << sampling.body_proposal_count << '\n'
      << "lambda_d = " << num(train.lambda_d) << '\n'
      << "learning_rate = " << num(train.learning_rate) << '\n'
      << "decay_every = " << train.decay_every << '\n'
      << "decay_factor = " << num(train.decay_factor) << '\n'
      << "batch_size = " << train.batch_size << '\n'
      << "epochs = " << train.epochs << '\n'
      << "momentum = " << num(train.momentum) << '\n'
      << "checkpoint_every = " << train.checkpoint_every << '\n'
      << "k = " << inference.k << '\n'
      << "lambda_h = " << num(inference.lambda_h) << '\n'
      << "background_competes = " << (inference.background_competes ? "true" : "false") << '\n'
      << "count = " << count << '\n'
      << "image_width = " << figure.width << '\n'
      << "image_height = " << figure.height << '\n'
      << "noise = " << num(figure.noise) << '\n'
      << "clutter_count = " << figure.clutter_count << '\n'
      << "scale_min = " << num(figure.scale_min) << '\n'
      << "scale_max = " << num(figure.scale_max) << '\n'
      << "lean_range = " << num(figure.lean_range) << '\n'
      << "input_size = " << network.input_size << '\n'
      << "towers = " << to_string(network.towers) << '\n'
      << "part_tower = " << format_tower(network.part_tower) << '\n'
      << "body_tower = " << format_tower(network.body_tower) << '\n'
      << "fully_connected = " << join(network.fully_connected) << '\n';
  return out.str();
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), std::move(base));
}

}  // namespace dspose
