#include "dspose/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dspose/error.hpp"
#include "dspose/parallel.hpp"
#include "json.hpp"

namespace dspose {

using nlohmann::json;

DatasetManifest DatasetManifest::lsp_schema() {
  DatasetManifest m;
  m.joint_names = {"right_ankle",    "right_knee",  "right_hip",   "left_hip",
                   "left_knee",      "left_ankle",  "right_wrist", "right_elbow",
                   "right_shoulder", "left_shoulder", "left_elbow", "left_wrist",
                   "neck",           "head_top"};
  m.torso = {9, 2};  // left shoulder, right hip
  m.limbs = {{"upper_arm", 8, 7}, {"upper_arm", 9, 10}, {"lower_arm", 7, 6},
             {"lower_arm", 10, 11}, {"upper_leg", 2, 1}, {"upper_leg", 3, 4},
             {"lower_leg", 1, 0}, {"lower_leg", 4, 5}, {"torso", 8, 2},
             {"torso", 9, 3}, {"head", 12, 13}};
  m.joint_groups = {{"elbows", {7, 10}}, {"wrists", {6, 11}}, {"knees", {1, 4}},
                    {"ankles", {0, 5}}};
  return m;
}

void DatasetManifest::validate() const {
  const int n = static_cast<int>(joint_names.size());
  if (n == 0) throw MalformedManifest("manifest declares no joints");
  auto check = [&](int j, const std::string& what) {
    if (j < 0 || j >= n) throw MalformedManifest(what + " joint index " + std::to_string(j) + " out of range");
  };
  check(torso.first, "torso");
  check(torso.second, "torso");
  if (torso.first == torso.second) throw MalformedManifest("torso joints must differ");
  for (const auto& limb : limbs) {
    check(limb.a, "limb " + limb.name);
    check(limb.b, "limb " + limb.name);
    if (limb.a == limb.b) throw MalformedManifest("limb " + limb.name + " joins a joint to itself");
  }
  for (const auto& group : joint_groups) {
    for (int j : group.joints) check(j, "group " + group.name);
  }
  if (!(torso_ratio >= 0.0) || !std::isfinite(torso_ratio)) {
    throw MalformedManifest("torso_ratio must be a non-negative number");
  }
  for (const auto& r : records) {
    if (r.pose.size() != joint_names.size()) {
      throw MalformedManifest("record " + r.image + " has " + std::to_string(r.pose.size()) +
                              " joints, expected " + std::to_string(n));
    }
    if (!r.pose.finite()) throw MalformedManifest("record " + r.image + " has non-finite coordinates");
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["format"] = "dspose-manifest";
  j["version"] = 1;
  j["joint_names"] = m.joint_names;
  j["torso_pair"] = {m.torso.first, m.torso.second};
  json limbs = json::array();
  for (const auto& l : m.limbs) limbs.push_back({{"name", l.name}, {"joints", {l.a, l.b}}});
  j["limbs"] = std::move(limbs);
  json groups = json::array();
  for (const auto& g : m.joint_groups) groups.push_back({{"name", g.name}, {"joints", g.joints}});
  j["joint_groups"] = std::move(groups);
  j["torso_ratio"] = m.torso_ratio;
  json records = json::array();
  for (const auto& r : m.records) {
    json joints = json::array();
    for (const Point& p : r.pose.joints) joints.push_back({p.x, p.y});
    records.push_back({{"image", r.image}, {"joints", std::move(joints)}});
  }
  j["records"] = std::move(records);
  return j.dump(1);
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != "dspose-manifest") {
      throw MalformedManifest("not a dspose manifest (missing format tag)");
    }
    m.joint_names = j.at("joint_names").get<std::vector<std::string>>();
    const auto torso = j.at("torso_pair").get<std::vector<int>>();
    if (torso.size() != 2) throw MalformedManifest("torso_pair must hold two joint indices");
    m.torso = {torso[0], torso[1]};
    for (const auto& l : j.value("limbs", json::array())) {
      const auto ab = l.at("joints").get<std::vector<int>>();
      if (ab.size() != 2) throw MalformedManifest("limb joints must be a pair");
      m.limbs.push_back({l.at("name").get<std::string>(), ab[0], ab[1]});
    }
    for (const auto& g : j.value("joint_groups", json::array())) {
      m.joint_groups.push_back({g.at("name").get<std::string>(), g.at("joints").get<std::vector<int>>()});
    }
    m.torso_ratio = j.value("torso_ratio", 0.0);
    for (const auto& r : j.at("records")) {
      SampleRecord rec;
      rec.image = r.at("image").get<std::string>();
      for (const auto& p : r.at("joints")) {
        if (!p.is_array() || p.size() != 2) throw MalformedManifest("joint of " + rec.image + " is not an (x, y) pair");
        rec.pose.joints.push_back(Point{p[0].get<double>(), p[1].get<double>()});
      }
      m.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw MalformedManifest(std::string("manifest parse error: ") + e.what());
  }
  m.validate();
  return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  manifest.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << manifest_to_json(manifest) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedManifest("cannot open manifest: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

void save_dataset(const std::filesystem::path& dir, DatasetManifest manifest,
                  const std::vector<Image>& images) {
  if (images.size() != manifest.records.size()) {
    throw MalformedManifest("image count does not match record count");
  }
  std::filesystem::create_directories(dir / "images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.ppm", i);
    manifest.records[i].image = std::string("images/") + name;
    write_pnm(dir / manifest.records[i].image, images[i]);
  }
  save_manifest(dir / "manifest.json", manifest);
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset ds;
  ds.manifest = load_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  ds.images.reserve(ds.manifest.records.size());
  for (const auto& r : ds.manifest.records) {
    const auto path = base / r.image;
    if (!std::filesystem::exists(path)) throw MissingImage(path.string());
    ds.images.push_back(read_pnm(path));
  }
  return ds;
}

double calibrate_torso_ratio(const Dataset& dataset) {
  if (dataset.images.size() != dataset.manifest.records.size()) {
    throw MalformedManifest("image count does not match record count");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    sum += torso_diameter(dataset.manifest.records[i].pose, dataset.manifest.torso) /
           dataset.images[i].height();
  }
  return dataset.images.empty() ? 0.0 : sum / static_cast<double>(dataset.images.size());
}

double estimated_torso_diameter(const DatasetManifest& manifest, int image_height) {
  if (!(manifest.torso_ratio > 0.0)) throw ConfigError("manifest has no torso_ratio calibration");
  return manifest.torso_ratio * image_height;
}

Dataset synthesize_dataset(const FigureConfig& cfg, std::uint64_t first, int count) {
  cfg.validate();
  Dataset ds;
  ds.manifest = DatasetManifest::lsp_schema();
  if (cfg.joint_count != static_cast<int>(ds.manifest.joint_count())) {
    throw ConfigError("synthetic figures must use the 14-joint LSP skeleton");
  }
  const auto n = static_cast<std::size_t>(std::max(count, 0));
  ds.images.resize(n);
  ds.manifest.records.resize(n);
  parallel_for(n, [&](std::size_t i) {
    Figure f = generate_figure(cfg, first + i);
    ds.images[i] = std::move(f.image);
    ds.manifest.records[i].pose = std::move(f.pose);
  });
  ds.manifest.torso_ratio = calibrate_torso_ratio(ds);
  return ds;
}

std::string pose_records_to_json(std::span<const PoseRecord> records,
                                 std::span<const std::string> joint_names) {
  json j;
  j["joint_names"] = std::vector<std::string>(joint_names.begin(), joint_names.end());
  j["estimates"] = json::array();
  for (const auto& r : records) {
    json joints = json::array();
    for (const Point& p : r.pose.joints) joints.push_back({p.x, p.y});
    j["estimates"].push_back({{"image", r.image}, {"joints", joints}, {"selected", r.selected}});
  }
  return j.dump(2);
}

std::vector<PoseRecord> pose_records_from_json(const std::string& text) {
  std::vector<PoseRecord> out;
  try {
    const json j = json::parse(text);
    for (const auto& e : j.at("estimates")) {
      PoseRecord r;
      r.image = e.at("image").get<std::string>();
      for (const auto& p : e.at("joints")) {
        if (!p.is_array() || p.size() != 2) throw MalformedManifest("joint of " + r.image + " is not an (x, y) pair");
        r.pose.joints.push_back(Point{p[0].get<double>(), p[1].get<double>()});
      }
      if (e.contains("selected")) r.selected = e.at("selected").get<std::vector<int>>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw MalformedManifest(std::string("pose file parse error: ") + e.what());
  }
  return out;
}

}  // namespace dspose
