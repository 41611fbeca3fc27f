#pragma once

// Oriented boxes, pinhole projection with near-plane clipping, and the
// 2D / BEV / 3D IoU family.
//
// Frames: ego is x-forward, y-left, z-up. Camera is z-forward, x-right,
// y-down. Box3D lives in the ego frame with yaw about ego +z.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cuboidfit/error.hpp"

namespace cuboidfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Minimum camera depth (meters) a point must exceed to be projected.
inline constexpr double kNearPlane = 0.1;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

struct Box3D {
  double x = 0, y = 0, z = 0;  // center, ego frame
  double l = 1, w = 1, h = 1;  // extents along box x, y, z
  double yaw = 0;              // about ego up-axis

  Vec3 center() const { return {x, y, z}; }
  double volume() const { return l * w * h; }

  bool operator==(const Box3D&) const = default;
};

inline bool is_valid(const Box3D& b) {
  const std::array<double, 7> v{b.x, b.y, b.z, b.l, b.w, b.h, b.yaw};
  if (!std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); })) return false;
  return b.l > 0 && b.w > 0 && b.h > 0 && b.yaw > -std::numbers::pi && b.yaw <= std::numbers::pi;
}

struct Box2D {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  /// Edges in residual order: left, top, right, bottom.
  std::array<double, 4> edges() const { return {x_min, y_min, x_max, y_max}; }

  bool operator==(const Box2D&) const = default;
};

inline bool is_valid(const Box2D& b) {
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) && std::isfinite(b.x_max) &&
         std::isfinite(b.y_max) && b.x_min <= b.x_max && b.y_min <= b.y_max;
}

/// Per-side trust flags of a projected box. A side is legal when its extremum
/// comes from a real corner rather than a near-plane clip point.
struct EdgeLegality {
  bool left = true, top = true, right = true, bottom = true;

  std::array<bool, 4> as_array() const { return {left, top, right, bottom}; }
  bool all() const { return left && top && right && bottom; }

  bool operator==(const EdgeLegality&) const = default;
};

struct CameraModel {
  std::string name;
  double fx = 1, fy = 1, cx = 0, cy = 0;
  int width = 1, height = 1;
  Mat3 rotation = Mat3::Identity();  // ego -> camera
  Vec3 translation = Vec3::Zero();   // p_cam = rotation * p_ego + translation

  Vec3 to_camera(const Vec3& p_ego) const { return rotation * p_ego + translation; }

  /// Optical center expressed in the ego frame.
  Vec3 optical_center() const { return -(rotation.transpose() * translation); }

  bool operator==(const CameraModel& o) const {
    return name == o.name && fx == o.fx && fy == o.fy && cx == o.cx && cy == o.cy &&
           width == o.width && height == o.height && rotation == o.rotation &&
           translation == o.translation;
  }
};

inline bool is_valid(const CameraModel& c) {
  if (!(c.fx > 0 && c.fy > 0 && c.width > 0 && c.height > 0)) return false;
  if (!std::isfinite(c.cx) || !std::isfinite(c.cy) || !c.rotation.allFinite() ||
      !c.translation.allFinite())
    return false;
  const Mat3 gram = c.rotation.transpose() * c.rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) return false;
  return c.rotation.determinant() > 0;
}

/// Rotation about ego +z.
inline Mat3 yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

/// Ego-frame point expressed in the box frame (origin at center, axes l/w/h).
inline Vec3 to_box_frame(const Box3D& b, const Vec3& p) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const Vec3 d = p - b.center();
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

inline Vec3 from_box_frame(const Box3D& b, const Vec3& q) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  return {b.x + c * q.x() - s * q.y(), b.y + s * q.x() + c * q.y(), b.z + q.z()};
}

/// Corners 0-3: bottom face counterclockwise seen from above, starting at
/// box-frame (+l/2, +w/2, -h/2). Corners 4-7: top face, same order.
inline std::array<Vec3, 8> box_corners(const Box3D& b) {
  static constexpr std::array<std::array<double, 3>, 8> kSigns{{
      {+1, +1, -1}, {-1, +1, -1}, {-1, -1, -1}, {+1, -1, -1},
      {+1, +1, +1}, {-1, +1, +1}, {-1, -1, +1}, {+1, -1, +1},
  }};
  std::array<Vec3, 8> out;
  for (std::size_t i = 0; i < 8; ++i) {
    const Vec3 q{kSigns[i][0] * b.l / 2, kSigns[i][1] * b.w / 2, kSigns[i][2] * b.h / 2};
    out[i] = from_box_frame(b, q);
  }
  return out;
}

/// The 12 wireframe segments as corner index pairs.
inline constexpr std::array<std::pair<int, int>, 12> kBoxEdges{{
    {0, 1}, {1, 2}, {2, 3}, {3, 0},
    {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct PixelPoint {
  double u = 0, v = 0;
  double depth = 0;
};

inline PixelPoint project_camera_point(const CameraModel& cam, const Vec3& pc) {
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy, pc.z()};
}

/// Pinhole projection of an ego-frame point; empty when depth <= kNearPlane.
inline std::optional<PixelPoint> project_point(const CameraModel& cam, const Vec3& p_ego) {
  const Vec3 pc = cam.to_camera(p_ego);
  if (!(pc.z() > kNearPlane)) return std::nullopt;
  return project_camera_point(cam, pc);
}

struct ProjectedBox {
  Box2D box;
  EdgeLegality legal;
};

struct Segment2D {
  Vec2 a, b;
};

namespace detail {

struct ClippedWireframe {
  std::vector<Vec3> corners;    // camera frame, depth > near plane
  std::vector<Vec3> clips;      // camera frame, depth == near plane
  std::vector<std::pair<Vec3, Vec3>> segments;
};

inline Vec3 near_plane_point(const Vec3& front, const Vec3& back) {
  const double t = (front.z() - kNearPlane) / (front.z() - back.z());
  Vec3 p = front + t * (back - front);
  p.z() = kNearPlane;
  return p;
}

inline ClippedWireframe clip_wireframe(const CameraModel& cam, const Box3D& b) {
  const auto corners = box_corners(b);
  std::array<Vec3, 8> pc;
  std::array<bool, 8> front{};
  ClippedWireframe out;
  for (std::size_t i = 0; i < 8; ++i) {
    pc[i] = cam.to_camera(corners[i]);
    front[i] = pc[i].z() > kNearPlane;
    if (front[i]) out.corners.push_back(pc[i]);
  }
  for (const auto& [i, j] : kBoxEdges) {
    if (front[i] && front[j]) {
      out.segments.emplace_back(pc[i], pc[j]);
    } else if (front[i] != front[j]) {
      const Vec3& f = front[i] ? pc[i] : pc[j];
      const Vec3& k = front[i] ? pc[j] : pc[i];
      const Vec3 clip = near_plane_point(f, k);
      out.clips.push_back(clip);
      out.segments.emplace_back(f, clip);
    }
  }
  return out;
}

}  // namespace detail

/// Axis-aligned hull of the near-plane clipped wireframe. Not clamped to the
/// image. Throws EntirelyBehindCamera when no corner is in front of the
/// near plane.
inline ProjectedBox project_box(const CameraModel& cam, const Box3D& b) {
  const auto wire = detail::clip_wireframe(cam, b);
  if (wire.corners.empty()) {
    throw Error(ErrorCode::EntirelyBehindCamera, "box is entirely behind camera '" + cam.name + "'");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box2D orig{inf, inf, -inf, -inf};
  for (const auto& p : wire.corners) {
    const auto px = project_camera_point(cam, p);
    orig.x_min = std::min(orig.x_min, px.u);
    orig.y_min = std::min(orig.y_min, px.v);
    orig.x_max = std::max(orig.x_max, px.u);
    orig.y_max = std::max(orig.y_max, px.v);
  }
  ProjectedBox out{orig, {}};
  if (wire.clips.empty()) return out;

  Box2D clip{inf, inf, -inf, -inf};
  for (const auto& p : wire.clips) {
    const auto px = project_camera_point(cam, p);
    clip.x_min = std::min(clip.x_min, px.u);
    clip.y_min = std::min(clip.y_min, px.v);
    clip.x_max = std::max(clip.x_max, px.u);
    clip.y_max = std::max(clip.y_max, px.v);
  }
  out.legal.left = orig.x_min <= clip.x_min;
  out.legal.top = orig.y_min <= clip.y_min;
  out.legal.right = orig.x_max >= clip.x_max;
  out.legal.bottom = orig.y_max >= clip.y_max;
  out.box = {std::min(orig.x_min, clip.x_min), std::min(orig.y_min, clip.y_min),
             std::max(orig.x_max, clip.x_max), std::max(orig.y_max, clip.y_max)};
  return out;
}

/// Projected wireframe, near-plane clipped. Empty if the box is behind.
inline std::vector<Segment2D> project_wireframe(const CameraModel& cam, const Box3D& b) {
  std::vector<Segment2D> out;
  for (const auto& [p, q] : detail::clip_wireframe(cam, b).segments) {
    const auto a = project_camera_point(cam, p);
    const auto c = project_camera_point(cam, q);
    out.push_back({{a.u, a.v}, {c.u, c.v}});
  }
  return out;
}

inline Box2D clamp_to_image(const Box2D& b, const CameraModel& cam) {
  const double w = cam.width, h = cam.height;
  return {std::clamp(b.x_min, 0.0, w), std::clamp(b.y_min, 0.0, h), std::clamp(b.x_max, 0.0, w),
          std::clamp(b.y_max, 0.0, h)};
}

/// Two zero-area boxes have IoU 0.
inline double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Ground-plane polygon helpers.

inline std::array<Vec2, 4> footprint(const Box3D& b) {
  const auto c = box_corners(b);
  return {Vec2{c[0].x(), c[0].y()}, Vec2{c[1].x(), c[1].y()}, Vec2{c[2].x(), c[2].y()},
          Vec2{c[3].x(), c[3].y()}};
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  return std::abs(s) / 2;
}

/// Sutherland-Hodgman: clips `subject` against a convex CCW polygon.
template <std::size_t N>
std::vector<Vec2> clip_convex(std::vector<Vec2> subject, const std::array<Vec2, N>& clipper) {
  for (std::size_t e = 0; e < N && !subject.empty(); ++e) {
    const Vec2& a = clipper[e];
    const Vec2& b = clipper[(e + 1) % N];
    const Vec2 dir = b - a;
    const auto side = [&](const Vec2& p) { return cross2(dir, p - a); };
    std::vector<Vec2> next;
    next.reserve(subject.size() + 2);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Vec2& p = subject[i];
      const Vec2& q = subject[(i + 1) % subject.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0) next.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        next.push_back(p + t * (q - p));
      }
    }
    subject = std::move(next);
  }
  return subject;
}

inline double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const auto fa = footprint(a);
  const auto fb = footprint(b);
  const auto poly = clip_convex(std::vector<Vec2>(fa.begin(), fa.end()), fb);
  if (poly.size() < 3) return 0.0;
  return polygon_area(poly);
}

inline double iou_bev(const Box3D& a, const Box3D& b) {
  if (a == b) return 1.0;
  const double inter = bev_intersection_area(a, b);
  const double uni = a.l * a.w + b.l * b.w - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline double iou_3d(const Box3D& a, const Box3D& b) {
  if (a == b) return 1.0;
  const double overlap_z =
      std::min(a.z + a.h / 2, b.z + b.h / 2) - std::max(a.z - a.h / 2, b.z - b.h / 2);
  if (!(overlap_z > 0)) return 0.0;
  const double inter = bev_intersection_area(a, b) * overlap_z;
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Distance from `ref` to the nearest point of the solid box.
inline double egocentric_distance(const Box3D& b, const Vec3& ref) {
  const Vec3 q = to_box_frame(b, ref);
  const Vec3 half{b.l / 2, b.w / 2, b.h / 2};
  const Vec3 nearest = q.cwiseMax(-half).cwiseMin(half);
  return (q - nearest).norm();
}

}  // namespace cuboidfit
