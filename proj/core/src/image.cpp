#include "dspose/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "dspose/error.hpp"

namespace dspose {

Image::Image(int width, int height, int channels)
    : width_(width),
      height_(height),
      channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, 0) {}

PixelBlock resample_patch(const Image& image, const Patch& square_patch, int size) {
  PixelBlock block;
  block.size = size;
  block.channels = image.channels();
  block.values.resize(static_cast<std::size_t>(block.channels) * size * size);

  const double step = square_patch.w / size;
  const double max_x = image.width() - 1;
  const double max_y = image.height() - 1;
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  constexpr double kScale = 1.0 / 255.0;

  for (int v = 0; v < size; ++v) {
    // Continuous coordinate of the output pixel center, shifted to index space.
    const double sy = std::clamp(square_patch.top() + (v + 0.5) * step - 0.5, 0.0, max_y);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double fy = sy - y0;
    for (int u = 0; u < size; ++u) {
      const double sx = std::clamp(square_patch.left() + (u + 0.5) * step - 0.5, 0.0, max_x);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double fx = sx - x0;
      for (int c = 0; c < block.channels; ++c) {
        const double top = (1.0 - fx) * image.at(x0, y0, c) + fx * image.at(x1, y0, c);
        const double bottom = (1.0 - fx) * image.at(x0, y1, c) + fx * image.at(x1, y1, c);
        block.values[c * plane + static_cast<std::size_t>(v) * size + u] =
            ((1.0 - fy) * top + fy * bottom) * kScale;
      }
    }
  }
  return block;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw IoError("PNM output supports 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << (image.channels() == 3 ? "P6" : "P5") << '\n'
      << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()),
            static_cast<std::streamsize>(image.data().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingImage(path.string());
  const std::string magic = next_token(in);
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw IoError("unsupported image format in " + path.string());
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PNM header in " + path.string());
  }
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw IoError("unsupported PNM geometry or depth in " + path.string());
  }
  Image image(width, height, channels);
  in.read(reinterpret_cast<char*>(image.data().data()),
          static_cast<std::streamsize>(image.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(image.data().size())) {
    throw IoError("truncated pixel data in " + path.string());
  }
  return image;
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 std::span<const std::uint16_t> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  std::vector<char> bytes(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    bytes[2 * i] = static_cast<char>(values[i] >> 8);
    bytes[2 * i + 1] = static_cast<char>(values[i] & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dspose
