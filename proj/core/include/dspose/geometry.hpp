#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dspose {

// Continuous image coordinates: origin at the top-left image corner, x to the
// right, y downward. Pixel (c, r) covers [c, c+1) x [r, r+1).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

// A set of L joints in image pixels.
struct Pose {
  std::vector<Point> joints;

  Pose() = default;
  explicit Pose(std::size_t joint_count) : joints(joint_count) {}
  explicit Pose(std::vector<Point> pts) : joints(std::move(pts)) {}

  std::size_t size() const { return joints.size(); }
  Point& operator[](std::size_t i) { return joints[i]; }
  const Point& operator[](std::size_t i) const { return joints[i]; }
  bool finite() const;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// Axis-aligned box given by width, height and center.
struct Patch {
  double w = 0.0;
  double h = 0.0;
  Point center;

  static Patch from_corners(double x0, double y0, double x1, double y1);

  double left() const { return center.x - 0.5 * w; }
  double right() const { return center.x + 0.5 * w; }
  double top() const { return center.y - 0.5 * h; }
  double bottom() const { return center.y + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const;
  // Closed-box containment.
  bool contains(Point p) const;
  bool contains(const Patch& other) const;

  friend bool operator==(const Patch&, const Patch&) = default;
};

// Joint coordinates relative to a patch, in units of the patch size.
struct NormalizedJoint {
  double x = 0.0;
  double y = 0.0;

  double squared_norm() const { return x * x + y * y; }
  bool visible() const;

  friend bool operator==(const NormalizedJoint&, const NormalizedJoint&) = default;
};

using VisibilityVector = std::vector<std::uint8_t>;

NormalizedJoint normalize_joint(Point joint, const Patch& patch);
Point denormalize_joint(NormalizedJoint n, const Patch& patch);

// v_i = 1 iff |x_i(p)| <= 0.5 and |y_i(p)| <= 0.5.
VisibilityVector visibility(const Pose& pose, const Patch& patch);
std::size_t visible_count(const Pose& pose, const Patch& patch);

// Grows the short side so that w == h, keeping the center.
Patch extend_to_square(const Patch& patch);

// Intersection of part and body; throws EmptyIntersection on zero area.
Patch crop_to_body(const Patch& part, const Patch& body);

// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

// Pixels whose centers fall in [left, right) x [top, bottom), clipped to the
// image. A patch covering no pixel center rasterizes to the single pixel that
// contains its (clamped) center, so every patch owns at least one pixel.
PixelRect rasterize(const Patch& patch, int image_width, int image_height);

}  // namespace dspose
