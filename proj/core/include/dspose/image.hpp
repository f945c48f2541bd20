#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dspose/geometry.hpp"

namespace dspose {

// 8-bit interleaved image (RGB unless stated otherwise).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 3);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Channel-major (C x N x N) block of values in [0, 1].
struct PixelBlock {
  int size = 0;
  int channels = 0;
  std::vector<double> values;

  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * size + y) * size + x];
  }
};

// Bilinear resampling of a square patch to N x N. Samples outside the image are
// edge-replicated.
PixelBlock resample_patch(const Image& image, const Patch& square_patch, int size);

// Binary PPM (P6) for RGB, PGM (P5) for single channel.
void write_pnm(const std::filesystem::path& path, const Image& image);
Image read_pnm(const std::filesystem::path& path);

// 16-bit binary PGM; values are written big-endian as the format requires.
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 std::span<const std::uint16_t> values);

}  // namespace dspose
