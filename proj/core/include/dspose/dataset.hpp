#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dspose/evaluation.hpp"
#include "dspose/geometry.hpp"
#include "dspose/image.hpp"
#include "dspose/sampling.hpp"
#include "dspose/synth.hpp"

namespace dspose {

struct SampleRecord {
  std::string image;  // path relative to the manifest directory
  Pose pose;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

// Dataset schema plus annotations. Coordinates are pixels with the origin at
// the top-left corner, x rightward and y downward.
struct DatasetManifest {
  std::vector<std::string> joint_names;
  TorsoPair torso{0, 1};
  std::vector<LimbDefinition> limbs;
  std::vector<JointGroup> joint_groups;
  double torso_ratio = 0.0;  // mean d(J) / image height, for test-time d(J)
  std::vector<SampleRecord> records;

  std::size_t joint_count() const { return joint_names.size(); }

  // LSP 14-joint schema: R ankle, R knee, R hip, L hip, L knee, L ankle,
  // R wrist, R elbow, R shoulder, L shoulder, L elbow, L wrist, neck, head top.
  static DatasetManifest lsp_schema();

  // Throws MalformedManifest on inconsistent metadata or records.
  void validate() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct Dataset {
  DatasetManifest manifest;
  std::vector<Image> images;  // aligned with manifest.records
};

// Writes images (PPM) under dir/images and the manifest to dir/manifest.json.
// Record image paths are overwritten.
void save_dataset(const std::filesystem::path& dir, DatasetManifest manifest,
                  const std::vector<Image>& images);

// Throws MalformedManifest or MissingImage naming the offending path.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// One estimated pose and the per-joint selected-set sizes.
struct PoseRecord {
  std::string image;
  Pose pose;
  std::vector<int> selected;

  friend bool operator==(const PoseRecord&, const PoseRecord&) = default;
};

// {"joint_names": [...], "estimates": [{"image", "joints": [[x, y], ...],
// "selected": [...]}]}. Doubles round-trip exactly.
std::string pose_records_to_json(std::span<const PoseRecord> records,
                                 std::span<const std::string> joint_names);
std::vector<PoseRecord> pose_records_from_json(const std::string& text);

// Mean d(J) / image height over the records; 0 for an empty dataset.
double calibrate_torso_ratio(const Dataset& dataset);

// Test-time d(J) for an image of the given height. Throws ConfigError when the
// manifest carries no calibration.
double estimated_torso_diameter(const DatasetManifest& manifest, int image_height);

// Figures first .. first + count - 1 under the LSP schema with a calibrated
// torso ratio. Record image paths are empty until saved.
Dataset synthesize_dataset(const FigureConfig& cfg, std::uint64_t first, int count);

}  // namespace dspose
