#pragma once

// SVG overlays: input boxes in red, refined boxes in green, 2D ground truth
// as blue dashed rectangles.

#include <cstdio>
#include <optional>
#include <span>
#include <string>

#include "cuboidfit/dataset.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

namespace svg_detail {

/// Liang-Barsky clip of a segment to [x0, x1] x [y0, y1].
inline std::optional<Segment2D> clip_segment(const Segment2D& s, double x0, double y0, double x1,
                                             double y1) {
  double t0 = 0, t1 = 1;
  const Vec2 d = s.b - s.a;
  const std::array<double, 4> p{-d.x(), d.x(), -d.y(), d.y()};
  const std::array<double, 4> q{s.a.x() - x0, x1 - s.a.x(), s.a.y() - y0, y1 - s.a.y()};
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] == 0) {
      if (q[i] < 0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return std::nullopt;
  }
  Segment2D out{s.a + t0 * d, s.a + t1 * d};
  // Pin endpoints to the guard box against rounding.
  for (Vec2* v : {&out.a, &out.b}) {
    v->x() = std::clamp(v->x(), x0, x1);
    v->y() = std::clamp(v->y(), y0, y1);
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string wireframe_group(const CameraModel& cam, const Box3D& b, const char* cls,
                                   const char* color) {
  const double w = cam.width, h = cam.height;
  std::string lines;
  for (const auto& seg : project_wireframe(cam, b)) {
    const auto c = clip_segment(seg, -w, -h, 2 * w, 2 * h);
    if (!c) continue;
    lines += "    <line x1=\"" + num(c->a.x()) + "\" y1=\"" + num(c->a.y()) + "\" x2=\"" +
             num(c->b.x()) + "\" y2=\"" + num(c->b.y()) + "\"/>\n";
  }
  if (lines.empty()) return {};
  return std::string("  <g class=\"") + cls + "\" stroke=\"" + color +
         "\" stroke-width=\"2\" fill=\"none\">\n" + lines + "  </g>\n";
}

}  // namespace svg_detail

/// `before[i]` and `after[i]` are drawn for `frame.objects[i]`; either span
/// may be empty.
inline std::string render_svg(const Frame& frame, const std::string& camera,
                              std::span<const Box3D> before, std::span<const Box3D> after) {
  const CameraModel* cam = frame.find_camera(camera);
  if (!cam) {
    throw Error(ErrorCode::UnknownCamera, "camera '" + camera + "' not in frame " + frame.frame_id);
  }
  using svg_detail::num;
  const std::string w = std::to_string(cam->width), h = std::to_string(cam->height);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
         "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  out += "  <rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
         "\" fill=\"#1e1e1e\"/>\n";
  for (const auto& b : before) out += svg_detail::wireframe_group(*cam, b, "before", "red");
  for (const auto& b : after) out += svg_detail::wireframe_group(*cam, b, "after", "green");
  for (const auto& o : frame.objects) {
    const auto it = o.gt_box2d.find(camera);
    if (it == o.gt_box2d.end()) continue;
    const double gw = cam->width, gh = cam->height;
    const Box2D& raw = it->second;
    const Box2D g{std::clamp(raw.x_min, -gw, 2 * gw), std::clamp(raw.y_min, -gh, 2 * gh),
                  std::clamp(raw.x_max, -gw, 2 * gw), std::clamp(raw.y_max, -gh, 2 * gh)};
    out += "  <rect class=\"gt\" x=\"" + num(g.x_min) + "\" y=\"" + num(g.y_min) + "\" width=\"" +
           num(g.width()) + "\" height=\"" + num(g.height()) +
           "\" stroke=\"blue\" stroke-dasharray=\"8,4\" fill=\"none\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cuboidfit
