#include "dspose/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "dspose/error.hpp"
#include "dspose/random.hpp"

namespace dspose {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

using Rgb = std::array<double, 3>;

Bone bone(int parent, int child, double rest_deg, double min_deg, double max_deg,
          double len_min, double len_max, double thickness, PartColor color) {
  return Bone{parent, child, rest_deg * kDeg, min_deg * kDeg, max_deg * kDeg,
              len_min, len_max, thickness, color};
}

Rgb base_color(PartColor c) {
  switch (c) {
    case PartColor::torso: return {0.85, 0.25, 0.20};
    case PartColor::arm: return {0.95, 0.80, 0.30};
    case PartColor::leg: return {0.20, 0.35, 0.85};
    case PartColor::head: return {0.95, 0.72, 0.58};
  }
  return {1.0, 1.0, 1.0};
}

// Row-major float canvas with alpha compositing.
class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h) {}

  void fill(const Rgb& c) { std::fill(px_.begin(), px_.end(), c); }

  void blend(int x, int y, const Rgb& c, double alpha) {
    if (alpha <= 0.0) return;
    alpha = std::min(alpha, 1.0);
    Rgb& p = px_[static_cast<std::size_t>(y) * w_ + x];
    for (int k = 0; k < 3; ++k) p[k] = (1.0 - alpha) * p[k] + alpha * c[k];
  }

  // Anti-aliased capsule of the given radius around segment ab.
  void capsule(Point a, Point b, double radius, const Rgb& c) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius - 1)));
    const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius - 1)));
    const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius + 1)));
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double dist = std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
        blend(x, y, c, radius + 0.5 - dist);
      }
    }
  }

  void disc(Point center, double radius, const Rgb& c) { capsule(center, center, radius, c); }

  // Anti-aliased convex polygon (vertices in either winding).
  void polygon(const std::vector<Point>& v, const Rgb& c) {
    if (v.size() < 3) return;
    double area = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& p = v[i];
      const Point& q = v[(i + 1) % v.size()];
      area += p.x * q.y - q.x * p.y;
    }
    const double sign = area >= 0.0 ? 1.0 : -1.0;
    double lx = v[0].x, hx = v[0].x, ly = v[0].y, hy = v[0].y;
    for (const Point& p : v) {
      lx = std::min(lx, p.x);
      hx = std::max(hx, p.x);
      ly = std::min(ly, p.y);
      hy = std::max(hy, p.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(lx - 1)));
    const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(hx + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(ly - 1)));
    const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(hy + 1)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        double inside = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v.size(); ++i) {
          const Point& p = v[i];
          const Point& q = v[(i + 1) % v.size()];
          const double ex = q.x - p.x, ey = q.y - p.y;
          const double len = std::hypot(ex, ey);
          if (len == 0.0) continue;
          // Positive on the interior side.
          inside = std::min(inside, sign * (ex * (py - p.y) - ey * (px - p.x)) / len);
        }
        blend(x, y, c, inside + 0.5);
      }
    }
  }

  Image quantize(double noise, Rng& rng) const {
    Image out(w_, h_, 3);
    std::normal_distribution<double> gauss(0.0, noise > 0.0 ? noise : 1.0);
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        const Rgb& p = px_[static_cast<std::size_t>(y) * w_ + x];
        for (int k = 0; k < 3; ++k) {
          double v = p[k];
          if (noise > 0.0) v += gauss(rng);
          out.at(x, y, k) = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
        }
      }
    }
    return out;
  }

 private:
  int w_, h_;
  std::vector<Rgb> px_;
};

}  // namespace

FigureConfig FigureConfig::lsp_default() {
  FigureConfig cfg;
  cfg.joint_count = 14;
  cfg.root_joint = 12;
  cfg.head_joint = 13;
  // Joint order: 0 R ankle, 1 R knee, 2 R hip, 3 L hip, 4 L knee, 5 L ankle,
  // 6 R wrist, 7 R elbow, 8 R shoulder, 9 L shoulder, 10 L elbow, 11 L wrist,
  // 12 neck, 13 head top. The figure faces the viewer, so its right side is on
  // the image left.
  cfg.bones = {
      bone(12, 13, 180, -20, 20, 9.0, 10.0, 3.0, PartColor::head),
      bone(12, 8, 90, -8, 8, 6.5, 7.5, 3.0, PartColor::torso),
      bone(12, 9, -90, -8, 8, 6.5, 7.5, 3.0, PartColor::torso),
      bone(12, 2, 14, -4, 4, 18.0, 20.0, 3.0, PartColor::torso),
      bone(12, 3, -14, -4, 4, 18.0, 20.0, 3.0, PartColor::torso),
      bone(8, 7, -80, -25, 110, 9.5, 11.0, 3.0, PartColor::arm),
      bone(7, 6, 0, -90, 45, 8.5, 10.0, 3.0, PartColor::arm),
      bone(9, 10, 80, -110, 25, 9.5, 11.0, 3.0, PartColor::arm),
      bone(10, 11, 0, -45, 90, 8.5, 10.0, 3.0, PartColor::arm),
      bone(2, 1, -10, -20, 25, 12.0, 14.0, 4.0, PartColor::leg),
      bone(1, 0, 0, -25, 25, 11.0, 13.0, 4.0, PartColor::leg),
      bone(3, 4, 10, -25, 20, 12.0, 14.0, 4.0, PartColor::leg),
      bone(4, 5, 0, -25, 25, 11.0, 13.0, 4.0, PartColor::leg),
  };
  cfg.torso_polygon = {8, 9, 3, 2};
  return cfg;
}

void FigureConfig::validate() const {
  if (width < 8 || height < 8) throw ConfigError("figure image must be at least 8x8");
  if (joint_count < 2) throw ConfigError("figure needs at least two joints");
  if (root_joint < 0 || root_joint >= joint_count) throw ConfigError("root joint out of range");
  if (static_cast<int>(bones.size()) != joint_count - 1) {
    throw ConfigError("skeleton must be a tree: expected joint_count - 1 bones");
  }
  std::vector<std::uint8_t> placed(static_cast<std::size_t>(joint_count), 0);
  placed[static_cast<std::size_t>(root_joint)] = 1;
  for (const Bone& b : bones) {
    if (b.parent < 0 || b.parent >= joint_count || b.child < 0 || b.child >= joint_count) {
      throw ConfigError("bone joint index out of range");
    }
    if (!placed[static_cast<std::size_t>(b.parent)]) {
      throw ConfigError("bone parent " + std::to_string(b.parent) + " is not placed before its child");
    }
    if (placed[static_cast<std::size_t>(b.child)]) {
      throw ConfigError("joint " + std::to_string(b.child) + " is placed twice");
    }
    if (!(b.length_min > 0.0 && b.length_min <= b.length_max)) {
      throw ConfigError("bone lengths must be positive with min <= max");
    }
    if (b.angle_min > b.angle_max) throw ConfigError("bone angle range is inverted");
    placed[static_cast<std::size_t>(b.child)] = 1;
  }
  if (!(scale_min > 0.0 && scale_min <= scale_max)) throw ConfigError("invalid figure scale range");
  if (noise < 0.0) throw ConfigError("noise must be non-negative");
  for (int j : torso_polygon) {
    if (j < 0 || j >= joint_count) throw ConfigError("torso polygon joint out of range");
  }
  if (head_joint >= joint_count) throw ConfigError("head joint out of range");
}

Pose forward_kinematics(const FigureConfig& cfg, const Articulation& art) {
  Pose pose(static_cast<std::size_t>(cfg.joint_count));
  std::vector<double> direction(static_cast<std::size_t>(cfg.joint_count), 0.0);
  const double axis = 0.5 * std::numbers::pi + art.lean;
  pose[static_cast<std::size_t>(cfg.root_joint)] = art.root;
  direction[static_cast<std::size_t>(cfg.root_joint)] = axis;
  for (std::size_t k = 0; k < cfg.bones.size(); ++k) {
    const Bone& b = cfg.bones[k];
    const auto parent = static_cast<std::size_t>(b.parent);
    const auto child = static_cast<std::size_t>(b.child);
    const double angle = direction[parent] + b.rest_angle + art.deviations[k];
    pose[child] = Point{pose[parent].x + art.lengths[k] * std::cos(angle),
                        pose[parent].y + art.lengths[k] * std::sin(angle)};
    direction[child] = angle;
  }
  return pose;
}

Image render_figure(const FigureConfig& cfg, const Articulation& art, std::uint64_t index) {
  const Pose pose = forward_kinematics(cfg, art);
  Rng rng = make_rng(cfg.seed, stream::kFigure, index ^ 0xa5a5a5a5ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Canvas canvas(cfg.width, cfg.height);
  const Rgb background{0.15 + 0.5 * unit(rng), 0.15 + 0.5 * unit(rng), 0.15 + 0.5 * unit(rng)};
  canvas.fill(background);
  for (int n = 0; n < cfg.clutter_count; ++n) {
    const Rgb color{unit(rng), unit(rng), unit(rng)};
    const Point c{cfg.width * unit(rng), cfg.height * unit(rng)};
    const double size = 2.0 + 6.0 * unit(rng);
    if (unit(rng) < 0.5) {
      canvas.disc(c, size, color);
    } else {
      const double w = size * (0.5 + unit(rng)), h = size * (0.5 + unit(rng));
      canvas.polygon({{c.x - w, c.y - h}, {c.x + w, c.y - h}, {c.x + w, c.y + h}, {c.x - w, c.y + h}},
                     color);
    }
  }

  auto jittered = [&](PartColor part) {
    Rgb c = base_color(part);
    for (double& v : c) v = std::clamp(v + cfg.color_jitter * (2.0 * unit(rng) - 1.0), 0.0, 1.0);
    return c;
  };
  const std::array<Rgb, 4> palette{jittered(PartColor::torso), jittered(PartColor::arm),
                                   jittered(PartColor::leg), jittered(PartColor::head)};
  auto color_of = [&](PartColor part) { return palette[static_cast<std::size_t>(part)]; };

  if (!cfg.torso_polygon.empty()) {
    std::vector<Point> poly;
    for (int j : cfg.torso_polygon) poly.push_back(pose[static_cast<std::size_t>(j)]);
    canvas.polygon(poly, color_of(PartColor::torso));
  }
  for (PartColor layer : {PartColor::torso, PartColor::leg, PartColor::arm, PartColor::head}) {
    for (const Bone& b : cfg.bones) {
      if (b.color != layer) continue;
      canvas.capsule(pose[static_cast<std::size_t>(b.parent)],
                     pose[static_cast<std::size_t>(b.child)], 0.5 * b.thickness, color_of(layer));
    }
  }
  if (cfg.head_joint >= 0) {
    const Point neck = pose[static_cast<std::size_t>(cfg.root_joint)];
    const Point top = pose[static_cast<std::size_t>(cfg.head_joint)];
    const double scale = art.lengths.empty() ? 1.0 : art.lengths.front() / cfg.bones.front().length_min;
    const double r = std::min(cfg.head_radius * std::min(scale, 1.2), 0.5 * distance(neck, top));
    // Disc touching the head-top joint.
    const double t = 1.0 - r / std::max(distance(neck, top), 1e-9);
    canvas.disc(Point{neck.x + t * (top.x - neck.x), neck.y + t * (top.y - neck.y)}, r,
                color_of(PartColor::head));
  }
  return canvas.quantize(cfg.noise, rng);
}

Figure generate_figure(const FigureConfig& cfg, std::uint64_t index) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, stream::kFigure, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Articulation art;
  art.lean = cfg.lean_range * (2.0 * unit(rng) - 1.0);
  double scale = cfg.scale_min + (cfg.scale_max - cfg.scale_min) * unit(rng);
  art.deviations.resize(cfg.bones.size());
  art.lengths.resize(cfg.bones.size());
  for (std::size_t k = 0; k < cfg.bones.size(); ++k) {
    const Bone& b = cfg.bones[k];
    art.deviations[k] = b.angle_min + (b.angle_max - b.angle_min) * unit(rng);
    art.lengths[k] = scale * (b.length_min + (b.length_max - b.length_min) * unit(rng));
  }

  // Fit the joint bounding box inside the margins, shrinking if needed.
  Pose pose = forward_kinematics(cfg, art);
  auto bounds = [](const Pose& p) {
    double x0 = p[0].x, x1 = p[0].x, y0 = p[0].y, y1 = p[0].y;
    for (const Point& j : p.joints) {
      x0 = std::min(x0, j.x);
      x1 = std::max(x1, j.x);
      y0 = std::min(y0, j.y);
      y1 = std::max(y1, j.y);
    }
    return std::array<double, 4>{x0, y0, x1, y1};
  };
  auto box = bounds(pose);
  const double room_w = cfg.width - 2.0 * cfg.margin;
  const double room_h = cfg.height - 2.0 * cfg.margin;
  const double fit = std::min({1.0, room_w / std::max(box[2] - box[0], 1e-9),
                               room_h / std::max(box[3] - box[1], 1e-9)});
  if (fit < 1.0) {
    for (double& len : art.lengths) len *= 0.999 * fit;
    pose = forward_kinematics(cfg, art);
    box = bounds(pose);
  }
  const double slack_x = std::max(0.0, room_w - (box[2] - box[0]));
  const double slack_y = std::max(0.0, room_h - (box[3] - box[1]));
  art.root = Point{cfg.margin + slack_x * unit(rng) - box[0],
                   cfg.margin + slack_y * unit(rng) - box[1]};

  Figure figure;
  figure.pose = forward_kinematics(cfg, art);
  figure.image = render_figure(cfg, art, index);
  figure.articulation = std::move(art);
  return figure;
}

}  // namespace dspose
