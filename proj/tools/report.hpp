#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dspose/dataset.hpp"
#include "dspose/evaluation.hpp"
#include "dspose/inference.hpp"
#include "dspose/training.hpp"

namespace dspose::cli {

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string loss_csv_header();
std::string loss_csv_row(const EpochStats& stats);

std::string pcp_csv(const PcpResult& result, std::span<const LimbDefinition> limbs);
// One row per fraction: fraction, all joints, then one column per group.
std::string pdj_csv(const PdjCurve& curve);
// Line plot of every PDJ curve against the fraction of d(J).
std::string pdj_svg(const PdjCurve& curve);
// Rows: label, AP per joint in percent, mAP.
std::string ap_csv(const std::vector<std::pair<std::string, ApResult>>& rows,
                   std::span<const std::string> joint_names);

// Min-max scaled 16-bit plane of one heatmap; `low`/`high` receive the scale.
std::vector<std::uint16_t> heatmap_levels(const HeatmapSet& maps, int joint, double& low,
                                          double& high);

}  // namespace dspose::cli
