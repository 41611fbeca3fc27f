#pragma once

// View classification, anchor construction and anchor-edge refinement.
//
// A refinement never moves the anchored face(s): the anchor point stays on
// the refined box and the yaw is copied through, so the distance from the
// sensor to the anchored face planes is unchanged.

#include <array>
#include <cmath>
#include <string>

#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

enum class ViewKind { FrontView, CornerView };

/// One of the 8 sensor/object relative views. Even indices see a single side
/// face (0 = +x, 2 = +y, 4 = -x, 6 = -y); odd indices see the two faces on
/// either side, counterclockwise (1 = +x/+y, 3 = -x/+y, 5 = -x/-y, 7 = +x/-y).
struct ViewCategory {
  int index = 0;

  ViewKind kind() const { return index % 2 == 0 ? ViewKind::FrontView : ViewKind::CornerView; }
  bool operator==(const ViewCategory&) const = default;
};

/// A side face in box-frame terms: outward normal is `sign` along `axis`
/// (0 = box x, 1 = box y).
struct FaceRef {
  int axis = 0;
  int sign = 1;
  bool operator==(const FaceRef&) const = default;
};

/// 0 = +x, 1 = +y, 2 = -x, 3 = -y (counterclockwise).
inline FaceRef face_from_index(int f) {
  static constexpr std::array<FaceRef, 4> kFaces{{{0, +1}, {1, +1}, {0, -1}, {1, -1}}};
  return kFaces[static_cast<std::size_t>(((f % 4) + 4) % 4)];
}

struct AnchorEdge {
  Vec3 direction = Vec3::UnitZ();  // unit, ego frame
  double length = 1;               // base length, meters
  int axis = 2;                    // box-frame axis the edge runs along
  int sign = 1;                    // direction along that axis
};

struct AnchorSpec {
  ViewCategory category;
  Vec3 anchor_point = Vec3::Zero();
  AnchorEdge edge_left, edge_right, edge_up, edge_down;
  std::array<FaceRef, 2> faces{};  // visible faces; only faces[0] for FrontView
  double yaw = 0;                  // box yaw the spec was built for

  int face_count() const { return category.kind() == ViewKind::FrontView ? 1 : 2; }
};

/// Scale factors for the left, right, up and down anchor edges.
struct RefineParams {
  double d_l = 1, d_r = 1, d_u = 1, d_d = 1;

  static RefineParams identity() { return {}; }
  static RefineParams from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
  std::array<double, 4> to_array() const { return {d_l, d_r, d_u, d_d}; }

  bool operator==(const RefineParams&) const = default;
};

inline bool is_valid(const RefineParams& d) {
  for (double v : d.to_array()) {
    if (!(v > 0 && v < 2)) return false;
  }
  return true;
}

/// Componentwise product; throws OutOfRange if a component leaves (0, 2).
inline RefineParams compose_params(const RefineParams& a, const RefineParams& b) {
  const RefineParams out{a.d_l * b.d_l, a.d_r * b.d_r, a.d_u * b.d_u, a.d_d * b.d_d};
  if (!is_valid(out)) throw Error(ErrorCode::OutOfRange, "composed refinement leaves (0, 2)");
  return out;
}

inline ViewCategory classify_view(const Box3D& b, const Vec3& sensor) {
  const Vec3 q = to_box_frame(b, sensor);
  const bool px = q.x() > b.l / 2, nx = q.x() < -b.l / 2;
  const bool py = q.y() > b.w / 2, ny = q.y() < -b.w / 2;
  if (px) return {py ? 1 : ny ? 7 : 0};
  if (nx) return {py ? 3 : ny ? 5 : 4};
  if (py) return {2};
  if (ny) return {6};
  throw Error(ErrorCode::SensorInsideFootprint, "sensor lies inside the box footprint");
}

namespace detail {

inline Vec3 box_axis_world(const Box3D& b, int axis, int sign) {
  Vec3 e = Vec3::Zero();
  e[axis] = sign;
  if (axis == 2) return e;
  return yaw_rotation(b.yaw) * e;
}

inline AnchorEdge make_edge(const Box3D& b, int axis, int sign, double length) {
  return {box_axis_world(b, axis, sign), length, axis, sign};
}

/// True when the far end of `a` sits left of the far end of `b` as seen by
/// `cam`: smaller image x, or counterclockwise bearing about the optical
/// center when either end is not projectable.
inline bool is_left_of(const CameraModel& cam, const Vec3& anchor, const AnchorEdge& a,
                       const AnchorEdge& b) {
  const Vec3 ea = anchor + a.direction * a.length;
  const Vec3 eb = anchor + b.direction * b.length;
  const auto pa = project_point(cam, ea);
  const auto pb = project_point(cam, eb);
  if (pa && pb && pa->u != pb->u) return pa->u < pb->u;
  const Vec3 s = cam.optical_center();
  const Vec2 ra{ea.x() - s.x(), ea.y() - s.y()};
  const Vec2 rb{eb.x() - s.x(), eb.y() - s.y()};
  return cross2(rb, ra) > 0;
}

}  // namespace detail

/// Builds the anchor point and the four anchor edges for `b` seen from `cam`.
/// `cat` must be the category of `b` relative to the camera's optical center.
inline AnchorSpec anchor_spec(const Box3D& b, ViewCategory cat, const CameraModel& cam) {
  if (classify_view(b, cam.optical_center()) != cat) {
    throw Error(ErrorCode::InvalidArgument,
                "view category " + std::to_string(cat.index) + " does not match camera geometry");
  }
  AnchorSpec spec;
  spec.category = cat;
  spec.yaw = b.yaw;
  spec.edge_up = detail::make_edge(b, 2, +1, b.h / 2);
  spec.edge_down = detail::make_edge(b, 2, -1, b.h / 2);
  const std::array<double, 2> dims{b.l, b.w};

  AnchorEdge first, second;
  Vec3 anchor_box = Vec3::Zero();
  if (cat.kind() == ViewKind::CornerView) {
    const FaceRef fa = face_from_index((cat.index - 1) / 2);
    const FaceRef fb = face_from_index((cat.index + 1) / 2);
    spec.faces = {fa, fb};
    anchor_box[fa.axis] = fa.sign * dims[fa.axis] / 2;
    anchor_box[fb.axis] = fb.sign * dims[fb.axis] / 2;
    // Along each visible face, away from the shared edge.
    first = detail::make_edge(b, fb.axis, -fb.sign, dims[fb.axis]);
    second = detail::make_edge(b, fa.axis, -fa.sign, dims[fa.axis]);
  } else {
    const FaceRef f = face_from_index(cat.index / 2);
    spec.faces = {f, f};
    anchor_box[f.axis] = f.sign * dims[f.axis] / 2;
    const int tangent = 1 - f.axis;
    first = detail::make_edge(b, tangent, +1, dims[tangent] / 2);
    second = detail::make_edge(b, tangent, -1, dims[tangent] / 2);
  }
  spec.anchor_point = from_box_frame(b, anchor_box);
  if (detail::is_left_of(cam, spec.anchor_point, first, second)) {
    spec.edge_left = first;
    spec.edge_right = second;
  } else {
    spec.edge_left = second;
    spec.edge_right = first;
  }
  return spec;
}

/// Scales the anchor edges of `spec` by `d` and returns the refined box.
inline Box3D apply_refinement(const Box3D& b, const AnchorSpec& spec, const RefineParams& d) {
  const Vec3 a = to_box_frame(b, spec.anchor_point);
  std::array<double, 3> lo{}, hi{};
  const auto span = [&](int axis, double p, double q) {
    lo[axis] = std::min(p, q);
    hi[axis] = std::max(p, q);
  };
  span(2, a.z() - d.d_d * spec.edge_down.length, a.z() + d.d_u * spec.edge_up.length);

  const AnchorEdge& el = spec.edge_left;
  const AnchorEdge& er = spec.edge_right;
  const double end_l = a[el.axis] + el.sign * d.d_l * el.length;
  const double end_r = a[er.axis] + er.sign * d.d_r * er.length;
  if (spec.category.kind() == ViewKind::CornerView) {
    span(el.axis, a[el.axis], end_l);
    span(er.axis, a[er.axis], end_r);
  } else {
    span(el.axis, end_l, end_r);
    const FaceRef f = spec.faces[0];
    const double depth = f.axis == 0 ? b.l : b.w;
    span(f.axis, a[f.axis], a[f.axis] - f.sign * depth);
  }

  const Vec3 mid{(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2};
  const Vec3 c = from_box_frame(b, mid);
  Box3D out;
  out.x = c.x();
  out.y = c.y();
  out.z = c.z();
  out.l = hi[0] - lo[0];
  out.w = hi[1] - lo[1];
  out.h = hi[2] - lo[2];
  out.yaw = b.yaw;
  return out;
}

/// Anchor spec of `apply_refinement(b, spec, d)` with the anchor point held at
/// its original position: same point and directions, edge lengths scaled by
/// `d`. Refinements compose multiplicatively under this spec.
inline AnchorSpec refined_spec(const AnchorSpec& spec, const RefineParams& d) {
  AnchorSpec out = spec;
  out.edge_left.length *= d.d_l;
  out.edge_right.length *= d.d_r;
  out.edge_up.length *= d.d_u;
  out.edge_down.length *= d.d_d;
  return out;
}

struct Plane {
  Vec3 normal;  // unit, ego frame
  Vec3 point;
  double signed_distance(const Vec3& p) const { return normal.dot(p - point); }
};

/// Supporting planes of the anchored face(s), passing through the anchor.
inline std::vector<Plane> anchored_planes(const AnchorSpec& spec) {
  std::vector<Plane> out;
  for (int i = 0; i < spec.face_count(); ++i) {
    const FaceRef f = spec.faces[static_cast<std::size_t>(i)];
    Vec3 n = Vec3::Zero();
    n[f.axis] = f.sign;
    out.push_back({yaw_rotation(spec.yaw) * n, spec.anchor_point});
  }
  return out;
}

}  // namespace cuboidfit
