#pragma once

// Random generators and brute-force / Monte-Carlo oracles shared by the
// suites. Oracles here avoid the library code paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cuboidfit/cuboidfit.hpp"

namespace cuboidfit::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Box3D random_box(Rng& rng, double span = 20.0) {
  Box3D b;
  b.x = uniform(rng, -span, span);
  b.y = uniform(rng, -span, span);
  b.z = uniform(rng, -2, 2);
  b.l = uniform(rng, 0.5, 6);
  b.w = uniform(rng, 0.5, 3);
  b.h = uniform(rng, 0.5, 3);
  b.yaw = normalize_angle(uniform(rng, -std::numbers::pi, std::numbers::pi));
  return b;
}

inline RefineParams random_params(Rng& rng, double lo = 0.5, double hi = 1.5) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

/// Camera at the ego origin looking along ego +x, identity intrinsics layout.
inline CameraModel forward_camera(double f = 100, double cx = 0, double cy = 0, int w = 640,
                                  int h = 480) {
  CameraModel c = make_camera("cam", 0.0, Vec3::Zero(), f, w, h);
  c.fy = f;
  c.cx = cx;
  c.cy = cy;
  return c;
}

/// Arbitrary proper rotation from a random unit quaternion.
inline Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Independent corner oracle: explicit per-corner rotation + translation.
inline std::array<Vec3, 8> oracle_corners(const Box3D& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  std::array<Vec3, 8> out;
  const double xs[4] = {+0.5, -0.5, -0.5, +0.5};
  const double ys[4] = {+0.5, +0.5, -0.5, -0.5};
  for (int level = 0; level < 2; ++level) {
    for (int k = 0; k < 4; ++k) {
      const double dx = xs[k] * b.l, dy = ys[k] * b.w, dz = (level == 0 ? -0.5 : 0.5) * b.h;
      out[static_cast<std::size_t>(level * 4 + k)] = {b.x + c * dx - s * dy, b.y + s * dx + c * dy,
                                                      b.z + dz};
    }
  }
  return out;
}

inline Box2D oracle_hull(const CameraModel& cam, const Box3D& b) {
  Box2D out{1e300, 1e300, -1e300, -1e300};
  for (const auto& p : oracle_corners(b)) {
    const double xc = cam.rotation.row(0).dot(p) + cam.translation[0];
    const double yc = cam.rotation.row(1).dot(p) + cam.translation[1];
    const double zc = cam.rotation.row(2).dot(p) + cam.translation[2];
    const double u = cam.fx * (xc / zc) + cam.cx;
    const double v = cam.fy * (yc / zc) + cam.cy;
    out.x_min = std::min(out.x_min, u);
    out.x_max = std::max(out.x_max, u);
    out.y_min = std::min(out.y_min, v);
    out.y_max = std::max(out.y_max, v);
  }
  return out;
}

inline bool oracle_inside_footprint(const Box3D& b, double px, double py) {
  const double dx = px - b.x, dy = py - b.y;
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double u = c * dx + s * dy, v = -s * dx + c * dy;
  return std::abs(u) <= b.l / 2 && std::abs(v) <= b.w / 2;
}

inline std::array<double, 4> footprint_bounds(const Box3D& a, const Box3D& b) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const Box3D* bx : {&a, &b}) {
    for (const auto& p : oracle_corners(*bx)) {
      x0 = std::min(x0, p.x());
      y0 = std::min(y0, p.y());
      x1 = std::max(x1, p.x());
      y1 = std::max(y1, p.y());
    }
  }
  return {x0, y0, x1, y1};
}

/// Monte-Carlo BEV IoU over the joint bounding rectangle.
inline double mc_iou_bev(const Box3D& a, const Box3D& b, int samples, Rng& rng) {
  const auto [x0, y0, x1, y1] = footprint_bounds(a, b);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  long inter = 0, uni = 0;
  for (int i = 0; i < samples; ++i) {
    const double px = ux(rng), py = uy(rng);
    const bool ia = oracle_inside_footprint(a, px, py), ib = oracle_inside_footprint(b, px, py);
    inter += ia && ib;
    uni += ia || ib;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double mc_iou_3d(const Box3D& a, const Box3D& b, int samples, Rng& rng) {
  const auto [x0, y0, x1, y1] = footprint_bounds(a, b);
  const double z0 = std::min(a.z - a.h / 2, b.z - b.h / 2);
  const double z1 = std::max(a.z + a.h / 2, b.z + b.h / 2);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1), uz(z0, z1);
  long inter = 0, uni = 0;
  for (int i = 0; i < samples; ++i) {
    const double px = ux(rng), py = uy(rng), pz = uz(rng);
    const bool ia = oracle_inside_footprint(a, px, py) && std::abs(pz - a.z) <= a.h / 2;
    const bool ib = oracle_inside_footprint(b, px, py) && std::abs(pz - b.z) <= b.h / 2;
    inter += ia && ib;
    uni += ia || ib;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Pair of boxes that overlap by construction (b's center near a's).
inline std::pair<Box3D, Box3D> overlapping_pair(Rng& rng) {
  Box3D a = random_box(rng, 5.0);
  Box3D b = random_box(rng, 5.0);
  b.x = a.x + uniform(rng, -1.5, 1.5);
  b.y = a.y + uniform(rng, -1.5, 1.5);
  b.z = a.z + uniform(rng, -0.8, 0.8);
  return {a, b};
}

/// Minimum over permutations of total cost, rows <= cols or transposed.
inline double brute_force_assignment(const CostMatrix& cost) {
  const bool t = cost.rows() > cost.cols();
  const CostMatrix a = t ? CostMatrix(cost.transpose()) : cost;
  std::vector<int> cols(static_cast<std::size_t>(a.cols()));
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(i);
  double best = 1e300;
  do {
    double s = 0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) s += a(r, cols[static_cast<std::size_t>(r)]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

/// Camera optical center offset so the sensor sits at box-frame (u, v).
inline CameraModel camera_at_box_offset(const Box3D& b, double u, double v, double z = 0.0) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const Vec3 pos{b.x + c * u - s * v, b.y + s * u + c * v, b.z + z};
  const double heading = std::atan2(b.y - pos.y(), b.x - pos.x());
  return make_camera("cam", heading, pos, 1000, 1920, 1080);
}

struct Setup {
  Box3D box;
  CameraModel cam;
  ViewCategory cat;
  AnchorSpec spec;
};

/// Random box seen from a random camera position outside its footprint.
inline Setup random_setup(Rng& rng) {
  for (;;) {
    Box3D b = random_box(rng, 10);
    const double ang = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double r = uniform(rng, 4, 30);
    const double u = r * std::cos(ang), v = r * std::sin(ang);
    if (std::abs(u) <= b.l / 2 + 0.05 && std::abs(v) <= b.w / 2 + 0.05) continue;
    const auto cam = camera_at_box_offset(b, u, v, uniform(rng, -1, 2));
    const auto cat = classify_view(b, cam.optical_center());
    return {b, cam, cat, anchor_spec(b, cat, cam)};
  }
}

}  // namespace cuboidfit::testing
