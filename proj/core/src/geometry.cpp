#include "dspose/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "dspose/error.hpp"

namespace dspose {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Pose::finite() const {
  return std::all_of(joints.begin(), joints.end(), [](Point p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
  });
}

Patch Patch::from_corners(double x0, double y0, double x1, double y1) {
  return Patch{x1 - x0, y1 - y0, Point{0.5 * (x0 + x1), 0.5 * (y0 + y1)}};
}

bool Patch::valid() const {
  return w > 0.0 && h > 0.0 && std::isfinite(w) && std::isfinite(h) &&
         std::isfinite(center.x) && std::isfinite(center.y);
}

bool Patch::contains(Point p) const {
  return p.x >= left() && p.x <= right() && p.y >= top() && p.y <= bottom();
}

bool Patch::contains(const Patch& other) const {
  return other.left() >= left() && other.right() <= right() &&
         other.top() >= top() && other.bottom() <= bottom();
}

bool NormalizedJoint::visible() const {
  return std::abs(x) <= 0.5 && std::abs(y) <= 0.5;
}

NormalizedJoint normalize_joint(Point joint, const Patch& patch) {
  return {(joint.x - patch.center.x) / patch.w, (joint.y - patch.center.y) / patch.h};
}

Point denormalize_joint(NormalizedJoint n, const Patch& patch) {
  return {patch.center.x + n.x * patch.w, patch.center.y + n.y * patch.h};
}

VisibilityVector visibility(const Pose& pose, const Patch& patch) {
  VisibilityVector v(pose.size());
  for (std::size_t i = 0; i < pose.size(); ++i) {
    v[i] = normalize_joint(pose[i], patch).visible() ? 1 : 0;
  }
  return v;
}

std::size_t visible_count(const Pose& pose, const Patch& patch) {
  std::size_t n = 0;
  for (const Point& j : pose.joints) {
    if (normalize_joint(j, patch).visible()) ++n;
  }
  return n;
}

Patch extend_to_square(const Patch& patch) {
  const double side = std::max(patch.w, patch.h);
  return Patch{side, side, patch.center};
}

Patch crop_to_body(const Patch& part, const Patch& body) {
  if (body.contains(part)) return part;
  const double x0 = std::max(part.left(), body.left());
  const double x1 = std::min(part.right(), body.right());
  const double y0 = std::max(part.top(), body.top());
  const double y1 = std::min(part.bottom(), body.bottom());
  if (!(x1 > x0) || !(y1 > y0)) throw EmptyIntersection();
  return Patch::from_corners(x0, y0, x1, y1);
}

PixelRect rasterize(const Patch& patch, int image_width, int image_height) {
  PixelRect r;
  r.x0 = std::max(0, static_cast<int>(std::ceil(patch.left() - 0.5)));
  r.x1 = std::min(image_width, static_cast<int>(std::ceil(patch.right() - 0.5)));
  r.y0 = std::max(0, static_cast<int>(std::ceil(patch.top() - 0.5)));
  r.y1 = std::min(image_height, static_cast<int>(std::ceil(patch.bottom() - 0.5)));
  if (r.empty()) {
    const int cx = std::clamp(static_cast<int>(std::floor(patch.center.x)), 0, image_width - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(patch.center.y)), 0, image_height - 1);
    r = PixelRect{cx, cy, cx + 1, cy + 1};
  }
  return r;
}

}  // namespace dspose
