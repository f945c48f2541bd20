#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dspose/error.hpp"

namespace dspose::cli {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

std::ostringstream precise() {
  std::ostringstream out;
  out.precision(17);
  return out;
}

}  // namespace

std::string loss_csv_header() { return "epoch,learning_rate,mean_loss,detection,localization\n"; }

std::string loss_csv_row(const EpochStats& s) {
  auto out = precise();
  out << s.epoch << ',' << s.learning_rate << ',' << s.mean_loss << ',' << s.detection << ','
      << s.localization << '\n';
  return out.str();
}

std::string pcp_csv(const PcpResult& r, std::span<const LimbDefinition> limbs) {
  auto out = precise();
  out << "limb,joint_a,joint_b,pcp,counted\n";
  for (std::size_t k = 0; k < limbs.size(); ++k) {
    out << limbs[k].name << ',' << limbs[k].a << ',' << limbs[k].b << ',' << r.per_limb[k] << ','
        << r.counted[k] << '\n';
  }
  out << "average,,," << r.average << ",\n";
  return out.str();
}

std::string pdj_csv(const PdjCurve& c) {
  auto out = precise();
  out << "fraction,all";
  for (const auto& name : c.group_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < c.fractions.size(); ++i) {
    std::ostringstream f;
    f << c.fractions[i];  // default precision keeps 0.03 readable
    out << f.str() << ',' << c.all[i];
    for (const auto& g : c.groups) out << ',' << g[i];
    out << '\n';
  }
  return out.str();
}

std::string pdj_svg(const PdjCurve& c) {
  constexpr double W = 480, H = 360, left = 50, right = 130, top = 20, bottom = 40;
  const double pw = W - left - right, ph = H - top - bottom;
  const double fmax = c.fractions.empty() ? 1.0 : std::max(c.fractions.back(), 1e-9);
  auto px = [&](double f) { return left + pw * f / fmax; };
  auto py = [&](double r) { return top + ph * (1.0 - r); };
  static const char* colors[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                 "#8c564b", "#e377c2"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double r = t / 5.0, f = fmax * t / 5.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(r) + 4 << "\" text-anchor=\"end\">" << r
        << "</text>\n"
        << "<text x=\"" << px(f) << "\" y=\"" << top + ph + 14 << "\" text-anchor=\"middle\">" << f
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 8
      << "\" text-anchor=\"middle\">fraction of torso diameter</text>\n"
      << "<text x=\"14\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << top + ph / 2 << ")\">detection rate</text>\n";

  auto curve = [&](const std::vector<double>& rates, const std::string& name, std::size_t k) {
    const char* color = colors[k % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < rates.size(); ++i) out << px(c.fractions[i]) << ',' << py(rates[i]) << ' ';
    out << "\"/>\n";
    const double y = top + 10 + 16.0 * static_cast<double>(k);
    out << "<line x1=\"" << W - right + 10 << "\" y1=\"" << y << "\" x2=\"" << W - right + 30
        << "\" y2=\"" << y << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << W - right + 35 << "\" y=\"" << y + 4 << "\">" << name << "</text>\n";
  };
  curve(c.all, "all joints", 0);
  for (std::size_t g = 0; g < c.groups.size(); ++g) curve(c.groups[g], c.group_names[g], g + 1);
  out << "</svg>\n";
  return out.str();
}

std::string ap_csv(const std::vector<std::pair<std::string, ApResult>>& rows,
                   std::span<const std::string> joint_names) {
  auto out = precise();
  out << "input";
  for (const auto& name : joint_names) out << ',' << name;
  out << ",mAP\n";
  for (const auto& [label, r] : rows) {
    out << label;
    for (double ap : r.per_joint) {
      out << ',';
      if (!std::isnan(ap)) out << 100.0 * ap;
    }
    out << ',' << 100.0 * r.mean << '\n';
  }
  return out.str();
}

std::vector<std::uint16_t> heatmap_levels(const HeatmapSet& maps, int joint, double& low,
                                          double& high) {
  const auto plane = maps.plane(joint);
  const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
  low = *lo;
  high = *hi;
  std::vector<std::uint16_t> levels(plane.size(), 0);
  if (high > low) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      levels[i] = static_cast<std::uint16_t>(std::lround(65535.0 * (plane[i] - low) / (high - low)));
    }
  }
  return levels;
}

}  // namespace dspose::cli
