// dspose: synthetic data, training, pose estimation and evaluation.
//
// Exit codes: 0 success, 1 invalid arguments, configuration or input files,
// 2 any other runtime failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dspose/checkpoint.hpp"
#include "dspose/config.hpp"
#include "dspose/dataset.hpp"
#include "dspose/error.hpp"
#include "dspose/evaluation.hpp"
#include "dspose/inference.hpp"
#include "dspose/training.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace dspose;

namespace {

constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

// Options every subcommand accepts.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "Configuration file (key = value lines)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Seed for every random stream; overrides the config");
    cmd->add_option("--set", overrides, "Extra key=value configuration override")->take_all();
    cmd->add_option("--out", out, "Output directory")->required();
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.set_seed(*seed);
    cfg.validate();
    return cfg;
  }

  fs::path prepare_out(const RunConfig& cfg) const {
    fs::create_directories(out);
    cli::write_text(fs::path(out) / "config.txt", cfg.to_text());
    return out;
  }
};

std::vector<Pose> poses_of(const DatasetManifest& m) {
  std::vector<Pose> poses;
  for (const auto& r : m.records) poses.push_back(r.pose);
  return poses;
}

void log(const std::string& line) { std::cerr << line << std::endl; }

int cmd_synth(const Common& common, int count, std::uint64_t first) {
  RunConfig cfg = common.resolve();
  if (count >= 0) cfg.count = count;
  const fs::path out = common.prepare_out(cfg);
  const Dataset ds = synthesize_dataset(cfg.figure, first, cfg.count);
  save_dataset(out, ds.manifest, ds.images);
  log("wrote " + std::to_string(ds.images.size()) + " figures to " + (out / "manifest.json").string());
  return 0;
}

int cmd_train(const Common& common, const std::string& data, const std::string& resume,
              const std::string& ablation) {
  RunConfig cfg = common.resolve();
  if (!ablation.empty()) cfg.network.towers = parse_tower_mode(ablation);
  const Dataset ds = load_dataset(data);
  cfg.network.joints = static_cast<int>(ds.manifest.joint_count());
  cfg.network.validate();
  const fs::path out = common.prepare_out(cfg);

  Checkpoint start{init_params(cfg.network, cfg.train.seed), {}};
  if (!resume.empty()) {
    start = load_checkpoint(resume);
    if (!(start.params.spec() == cfg.network)) {
      throw ConfigError("checkpoint network does not match the configured network");
    }
  }
  auto pairs = build_patch_pairs(ds.images, poses_of(ds.manifest), ds.manifest.torso, cfg.sampling);
  log(std::to_string(pairs.size()) + " training pairs from " + std::to_string(ds.images.size()) + " images");
  const PatchPairSamples samples(ds.images, std::move(pairs), cfg.network.input_size);

  std::string csv = cli::loss_csv_header();
  const auto result = train(samples, std::move(start), cfg.train, [&](const EpochStats& s, const Checkpoint& ck) {
    csv += cli::loss_csv_row(s);
    cli::write_text(out / "loss.csv", csv);
    char line[160];
    std::snprintf(line, sizeof(line), "epoch %d  lr %.3g  loss %.5f  detection %.5f  localization %.5f",
                  s.epoch, s.learning_rate, s.mean_loss, s.detection, s.localization);
    log(line);
    if (cfg.train.checkpoint_every > 0 && s.epoch % cfg.train.checkpoint_every == 0) {
      char name[48];
      std::snprintf(name, sizeof(name), "checkpoint-epoch%04d.bin", s.epoch);
      save_checkpoint(out / name, ck);
    }
  });
  cli::write_text(out / "loss.csv", csv);
  save_checkpoint(out / "checkpoint.bin", result.checkpoint);
  log("wrote " + (out / "checkpoint.bin").string());
  return 0;
}

struct EstimateArgs {
  std::string checkpoint;
  std::string data;
  std::vector<std::string> images;
  std::optional<double> torso_ratio;
  bool heatmaps = false;
  bool oracle = false;
};

void write_heatmaps(const fs::path& dir, const std::string& stem, const PoseEstimate& e,
                    const std::vector<std::string>& joint_names) {
  std::string scale = "joint,min,max\n";
  for (int j = 1; j <= e.heatmaps.joints(); ++j) {
    double lo = 0.0, hi = 0.0;
    const auto levels = cli::heatmap_levels(e.heatmaps, j, lo, hi);
    const std::string& name = joint_names[static_cast<std::size_t>(j - 1)];
    write_pgm16(dir / (stem + "_" + name + ".pgm"), e.heatmaps.width(), e.heatmaps.height(), levels);
    char row[128];
    std::snprintf(row, sizeof(row), "%s,%.17g,%.17g\n", name.c_str(), lo, hi);
    scale += row;
  }
  cli::write_text(dir / (stem + "_scale.csv"), scale);
}

int cmd_estimate(const Common& common, const EstimateArgs& args) {
  const RunConfig cfg = common.resolve();
  if (args.oracle && args.data.empty()) throw ConfigError("--oracle needs --data for the true poses");
  if (!args.oracle && args.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  if (args.data.empty() && args.images.empty()) throw ConfigError("give --data or image files");
  if (!args.data.empty() && !args.images.empty()) throw ConfigError("give either --data or image files");

  DatasetManifest manifest = DatasetManifest::lsp_schema();
  std::vector<Image> images;
  std::vector<std::string> names;
  if (!args.data.empty()) {
    Dataset ds = load_dataset(args.data);
    manifest = std::move(ds.manifest);
    images = std::move(ds.images);
    for (const auto& r : manifest.records) names.push_back(r.image);
  } else {
    manifest.torso_ratio = 0.0;
    for (const auto& path : args.images) {
      if (!fs::exists(path)) throw MissingImage(path);
      images.push_back(read_pnm(path));
      names.push_back(path);
    }
  }
  if (args.torso_ratio) manifest.torso_ratio = *args.torso_ratio;

  std::optional<Checkpoint> ck;
  if (!args.oracle) {
    ck = load_checkpoint(args.checkpoint);
    if (ck->params.spec().joints != static_cast<int>(manifest.joint_count())) {
      throw ConfigError("checkpoint joint count does not match the dataset schema");
    }
  }
  const fs::path out = common.prepare_out(cfg);
  if (args.heatmaps) fs::create_directories(out / "heatmaps");

  std::vector<PoseRecord> records;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& img = images[i];
    const double d = estimated_torso_diameter(manifest, img.height());
    const PoseEstimate e =
        args.oracle ? estimate_pose(ImageSize{img.width(), img.height()},
                                    oracle_evaluator(manifest.records[i].pose), d, cfg.sampling, cfg.inference)
                    : estimate_pose(img, ck->params, d, cfg.sampling, cfg.inference);
    records.push_back(PoseRecord{names[i], e.pose, e.selected});
    if (args.heatmaps) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "%06zu", i);
      write_heatmaps(out / "heatmaps", stem, e, manifest.joint_names);
    }
  }
  cli::write_text(out / "poses.json", pose_records_to_json(records, manifest.joint_names) + "\n");
  log("wrote " + std::to_string(records.size()) + " poses to " + (out / "poses.json").string());
  return 0;
}

ApResult detection_ap_on(const Dataset& ds, const NetworkParams& params, const SamplingConfig& sampling) {
  auto pairs = build_patch_pairs(ds.images, poses_of(ds.manifest), ds.manifest.torso, sampling);
  std::vector<PatchLabel> labels;
  for (const auto& p : pairs) labels.push_back(p.pair.label);
  const PatchPairSamples samples(ds.images, std::move(pairs), params.spec().input_size);
  return detection_ap(evaluate_samples(params, samples), labels, params.spec().joints);
}

void warn_undefined(const ApResult& r, const std::vector<std::string>& joint_names) {
  for (int j : r.undefined) {
    log("warning: no positive patches for " + joint_names[static_cast<std::size_t>(j - 1)] +
        "; AP undefined and left out of mAP");
  }
}

int cmd_eval(const Common& common, const std::string& estimates, const std::string& data,
             const std::string& checkpoint, double max_fraction, double step) {
  const RunConfig cfg = common.resolve();
  if (!(step > 0.0) || !(max_fraction >= 0.0)) throw ConfigError("PDJ fractions need step > 0 and max >= 0");
  const Dataset ds = load_dataset(data);
  const auto found = pose_records_from_json(cli::read_text(estimates));

  std::vector<Pose> est, truth;
  std::vector<double> diameters;
  for (const auto& r : ds.manifest.records) {
    const auto it = std::find_if(found.begin(), found.end(), [&](const PoseRecord& e) { return e.image == r.image; });
    if (it == found.end()) throw MalformedManifest("no estimate for " + r.image);
    if (it->pose.size() != r.pose.size()) throw MalformedManifest("estimate for " + r.image + " has the wrong joint count");
    est.push_back(it->pose);
    truth.push_back(r.pose);
    diameters.push_back(torso_diameter(r.pose, ds.manifest.torso));
  }
  const fs::path out = common.prepare_out(cfg);

  const PcpResult p = pcp(est, truth, ds.manifest.limbs);
  if (p.skipped > 0) log("warning: skipped " + std::to_string(p.skipped) + " zero-length limbs");
  cli::write_text(out / "pcp.csv", cli::pcp_csv(p, ds.manifest.limbs));
  const auto fractions = pdj_fractions(max_fraction, step);
  const PdjCurve curve = pdj_curve(est, truth, diameters, fractions, ds.manifest.joint_groups);
  cli::write_text(out / "pdj.csv", cli::pdj_csv(curve));
  cli::write_text(out / "pdj.svg", cli::pdj_svg(curve));

  char line[128];
  std::snprintf(line, sizeof(line), "PCP %.4f  PDJ@%.2f %.4f", p.average, fractions.back(), curve.all.back());
  log(line);
  if (!checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const ApResult ap = detection_ap_on(ds, ck.params, cfg.sampling);
    warn_undefined(ap, ds.manifest.joint_names);
    cli::write_text(out / "ap.csv", cli::ap_csv({{to_string(ck.params.spec().towers).data(), ap}},
                                                ds.manifest.joint_names));
    std::snprintf(line, sizeof(line), "mAP %.2f%%", 100.0 * ap.mean);
    log(line);
  }
  return 0;
}

int cmd_ablate(const Common& common, const std::string& data, const std::string& test_data) {
  const RunConfig cfg = common.resolve();
  const Dataset train_set = load_dataset(data);
  const Dataset test_set = load_dataset(test_data);
  if (train_set.manifest.joint_count() != test_set.manifest.joint_count()) {
    throw ConfigError("training and test schemas differ");
  }
  const fs::path out = common.prepare_out(cfg);
  auto pairs = build_patch_pairs(train_set.images, poses_of(train_set.manifest), train_set.manifest.torso,
                                 cfg.sampling);

  std::vector<std::pair<std::string, ApResult>> rows;
  for (const TowerMode mode : {TowerMode::part_only, TowerMode::body_only, TowerMode::dual}) {
    LayerSpec spec = cfg.network;
    spec.joints = static_cast<int>(train_set.manifest.joint_count());
    spec.towers = mode;
    spec.validate();
    const std::string name(to_string(mode));
    log("training " + name);
    const PatchPairSamples samples(train_set.images, pairs, spec.input_size);
    const auto r = train(samples, Checkpoint{init_params(spec, cfg.train.seed), {}}, cfg.train);
    save_checkpoint(out / ("checkpoint-" + name + ".bin"), r.checkpoint);
    const ApResult ap = detection_ap_on(test_set, r.checkpoint.params, cfg.sampling);
    warn_undefined(ap, test_set.manifest.joint_names);
    char line[96];
    std::snprintf(line, sizeof(line), "%s mAP %.2f%%", name.c_str(), 100.0 * ap.mean);
    log(line);
    rows.emplace_back(name, ap);
  }
  cli::write_text(out / "ablation.csv", cli::ap_csv(rows, train_set.manifest.joint_names));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-source CNN human pose estimation on patch pairs"};
  app.require_subcommand(1);

  Common common;
  int count = -1;
  std::uint64_t first = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic figure dataset");
  common.add_to(synth);
  synth->add_option("--count", count, "Number of figures; overrides the config");
  synth->add_option("--first", first, "Index of the first figure");

  std::string data, resume, ablation;
  auto* train_cmd = app.add_subcommand("train", "Train the network on a dataset");
  common.add_to(train_cmd);
  train_cmd->add_option("--data", data, "Dataset manifest")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  train_cmd->add_option("--ablation", ablation, "Network inputs")
      ->check(CLI::IsMember({"part", "body", "dual"}));

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate poses with a trained network");
  common.add_to(estimate);
  estimate->add_option("--checkpoint", est.checkpoint, "Trained checkpoint")->check(CLI::ExistingFile);
  estimate->add_option("--data", est.data, "Dataset manifest whose images are estimated")
      ->check(CLI::ExistingFile);
  estimate->add_option("images", est.images, "PPM/PGM images to estimate instead of --data");
  estimate->add_option("--torso-ratio", est.torso_ratio, "d(J) / image height; overrides the manifest");
  estimate->add_flag("--heatmaps", est.heatmaps, "Write one 16-bit PGM per joint");
  estimate->add_flag("--oracle", est.oracle, "Use ground-truth network outputs from --data");

  std::string estimates, checkpoint;
  double max_fraction = 0.5, step = 0.01;
  auto* eval = app.add_subcommand("eval", "Score estimates with PCP, PDJ and detection AP");
  common.add_to(eval);
  eval->add_option("--estimates", estimates, "poses.json from estimate")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Ground-truth manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", checkpoint, "Also report detection AP for this network")
      ->check(CLI::ExistingFile);
  eval->add_option("--max-fraction", max_fraction, "Largest PDJ fraction of d(J)");
  eval->add_option("--step", step, "PDJ fraction step");

  std::string test_data;
  auto* ablate = app.add_subcommand("ablate", "Compare part-only, body-only and dual-source detection AP");
  common.add_to(ablate);
  ablate->add_option("--data", data, "Training manifest")->required()->check(CLI::ExistingFile);
  ablate->add_option("--test", test_data, "Held-out manifest")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  }

  try {
    if (*synth) return cmd_synth(common, count, first);
    if (*train_cmd) return cmd_train(common, data, resume, ablation);
    if (*estimate) return cmd_estimate(common, est);
    if (*eval) return cmd_eval(common, estimates, data, checkpoint, max_fraction, step);
    if (*ablate) return cmd_ablate(common, data, test_data);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const MalformedManifest& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const MissingImage& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
