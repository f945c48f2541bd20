#pragma once

#include <stdexcept>
#include <string>

namespace dspose {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Part and body patches share no area; the pair is discarded.
class EmptyIntersection : public Error {
 public:
  EmptyIntersection() : Error("patches do not overlap") {}
};

class NoValidPairs : public Error {
 public:
  NoValidPairs() : Error("no part/body pairing has a positive overlap") {}
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Training loss became NaN or infinite.
class Divergence : public Error {
 public:
  Divergence(int epoch, double loss)
      : Error("training diverged at epoch " + std::to_string(epoch) +
              " (loss " + std::to_string(loss) + ")"),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class MalformedManifest : public Error {
 public:
  using Error::Error;
};

class MissingImage : public Error {
 public:
  explicit MissingImage(std::string path)
      : Error("missing image: " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Invalid configuration key or value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dspose
