#pragma once

// Frames of annotated boxes and a seeded synthetic scene generator.
//
// The generator samples a true cuboid, picks planted anchor-edge scales d*
// and stores the box whose refinement by d* gives back the true cuboid. The
// truth table returned next to the frames holds d* and the cuboid; frames
// themselves never carry it.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cuboidfit/anchor.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

struct ObjectRecord {
  std::string object_id;
  Box3D box3d;
  std::map<std::string, Box2D> gt_box2d;  // keyed by camera name
  std::optional<RefineParams> planted_params;

  bool operator==(const ObjectRecord&) const = default;
};

struct Frame {
  std::string frame_id;
  std::vector<CameraModel> cameras;
  std::vector<ObjectRecord> objects;

  const CameraModel* find_camera(const std::string& name) const {
    for (const auto& c : cameras) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  const ObjectRecord* find_object(const std::string& id) const {
    for (const auto& o : objects) {
      if (o.object_id == id) return &o;
    }
    return nullptr;
  }

  bool operator==(const Frame&) const = default;
};

/// Throws InvalidArgument describing the first broken frame invariant.
inline void validate(const Frame& f) {
  std::set<std::string> cams, ids;
  for (const auto& c : f.cameras) {
    if (!cams.insert(c.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate camera '" + c.name + "'");
    }
    if (!is_valid(c)) throw Error(ErrorCode::InvalidArgument, "invalid camera '" + c.name + "'");
  }
  for (const auto& o : f.objects) {
    if (!ids.insert(o.object_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate object_id '" + o.object_id + "'");
    }
    if (!is_valid(o.box3d)) {
      throw Error(ErrorCode::InvalidArgument, "invalid box3d for '" + o.object_id + "'");
    }
    for (const auto& [cam, box] : o.gt_box2d) {
      if (!cams.count(cam)) {
        throw Error(ErrorCode::InvalidArgument,
                    "gt_box2d of '" + o.object_id + "' references unknown camera '" + cam + "'");
      }
      if (!is_valid(box)) {
        throw Error(ErrorCode::InvalidArgument, "invalid gt_box2d for '" + o.object_id + "'");
      }
    }
  }
}

struct TruthRecord {
  std::string object_id;
  std::string camera;  // camera the object was planted in
  RefineParams planted_params;
  Box3D true_box3d;
  Box2D true_box2d;

  bool operator==(const TruthRecord&) const = default;
};

struct FrameTruth {
  std::string frame_id;
  std::vector<TruthRecord> objects;

  bool operator==(const FrameTruth&) const = default;
};

/// Camera looking along ego heading `yaw`, optical center at `position`.
inline CameraModel make_camera(std::string name, double yaw, const Vec3& position, double f,
                               int width, int height) {
  Mat3 base;
  base << 0, -1, 0,  //
      0, 0, -1,      //
      1, 0, 0;
  CameraModel cam;
  cam.name = std::move(name);
  cam.fx = cam.fy = f;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.rotation = base * yaw_rotation(yaw).transpose();
  cam.translation = -(cam.rotation * position);
  return cam;
}

/// Ego heading of the camera's optical axis.
inline double camera_heading(const CameraModel& cam) {
  const Vec3 axis = cam.rotation.transpose() * Vec3::UnitZ();
  return std::atan2(axis.y(), axis.x());
}

/// Five-camera surround rig: front, left, right, rear-left, rear-right.
inline std::vector<CameraModel> default_rig() {
  constexpr double deg = std::numbers::pi / 180.0;
  const std::array<std::pair<const char*, double>, 5> mounts{{
      {"front", 0.0},
      {"left", 55.0 * deg},
      {"right", -55.0 * deg},
      {"rear_left", 140.0 * deg},
      {"rear_right", -140.0 * deg},
  }};
  std::vector<CameraModel> rig;
  for (const auto& [name, yaw] : mounts) {
    const Vec3 pos{1.2 * std::cos(yaw), 0.9 * std::sin(yaw), 1.6};
    rig.push_back(make_camera(name, yaw, pos, 1200.0, 1920, 1280));
  }
  return rig;
}

struct SynthConfig {
  std::uint64_t seed = 0;
  int n_frames = 10;
  int objects_per_frame = 8;
  double param_lo = 0.7;
  double param_hi = 1.3;
  double pose_noise_translation = 0.1;  // sigma, meters
  double pose_noise_yaw = 0.02;         // sigma, radians
  double gt2d_fraction = 1.0 / 3.0;
  std::vector<CameraModel> rig = default_rig();
};

/// Throws InvalidArgument naming the offending field.
inline void validate(const SynthConfig& c) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, field + ": " + why);
  };
  if (c.n_frames < 0) fail("n_frames", "must be >= 0");
  if (c.objects_per_frame < 0) fail("objects_per_frame", "must be >= 0");
  if (!(c.param_lo > 0 && c.param_lo <= c.param_hi && c.param_hi < 2)) {
    fail("param_range", "must satisfy 0 < lo <= hi < 2");
  }
  if (!(c.pose_noise_translation >= 0)) fail("pose_noise.translation", "must be >= 0");
  if (!(c.pose_noise_yaw >= 0)) fail("pose_noise.yaw", "must be >= 0");
  if (!(c.gt2d_fraction >= 0 && c.gt2d_fraction <= 1)) fail("gt2d_fraction", "must lie in [0, 1]");
  if (c.rig.empty()) fail("rig", "needs at least one camera");
  std::set<std::string> names;
  for (const auto& cam : c.rig) {
    if (!is_valid(cam)) fail("rig", "invalid camera '" + cam.name + "'");
    if (!names.insert(cam.name).second) fail("rig", "duplicate camera '" + cam.name + "'");
  }
}

struct SynthDataset {
  std::vector<Frame> frames;
  std::vector<FrameTruth> truth;
};

namespace detail {

/// Box whose anchor-edge refinement by `d` (anchored for `cat` in `cam`)
/// reproduces `truth`. Same yaw and anchored face planes as `truth`.
inline Box3D plant_inverse(const Box3D& truth, ViewCategory cat, const CameraModel& cam,
                           const RefineParams& d) {
  const AnchorSpec ts = anchor_spec(truth, cat, cam);
  const std::array<double, 3> dims{truth.l, truth.w, truth.h};
  std::array<double, 3> out_dims = dims;
  Vec3 c = Vec3::Zero();  // in truth's box frame

  out_dims[2] = 2 * truth.h / (d.d_u + d.d_d);
  c.z() = truth.h / 2 - d.d_u * out_dims[2] / 2;

  const AnchorEdge& el = ts.edge_left;
  const AnchorEdge& er = ts.edge_right;
  if (cat.kind() == ViewKind::CornerView) {
    const Vec3 a = to_box_frame(truth, ts.anchor_point);
    for (const auto& [edge, scale] : {std::pair{el, d.d_l}, std::pair{er, d.d_r}}) {
      out_dims[edge.axis] = dims[edge.axis] / scale;
      c[edge.axis] = a[edge.axis] + edge.sign * out_dims[edge.axis] / 2;
    }
  } else {
    const int k = el.axis;
    const double width = dims[k];
    out_dims[k] = 2 * width / (d.d_l + d.d_r);
    c[k] = el.sign * width / 2 - el.sign * d.d_l * out_dims[k] / 2;
  }

  Box3D out;
  const Vec3 w = from_box_frame(truth, c);
  out.x = w.x();
  out.y = w.y();
  out.z = w.z();
  out.l = out_dims[0];
  out.w = out_dims[1];
  out.h = out_dims[2];
  out.yaw = truth.yaw;
  return out;
}

inline bool corners_in_front(const CameraModel& cam, const Box3D& b, double min_depth) {
  for (const auto& p : box_corners(b)) {
    if (!(cam.to_camera(p).z() > min_depth)) return false;
  }
  return true;
}

inline bool boxes_close(const Box3D& a, const Box3D& b, double tol) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.z - b.z) <= tol &&
         std::abs(a.l - b.l) <= tol && std::abs(a.w - b.w) <= tol && std::abs(a.h - b.h) <= tol &&
         a.yaw == b.yaw;
}

inline std::string numbered(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%0*d", prefix, width, i);
  return buf;
}

}  // namespace detail

/// Deterministic in `cfg`. Objects that cannot be placed within a bounded
/// number of tries are skipped.
inline SynthDataset generate(const SynthConfig& cfg) {
  validate(cfg);
  constexpr int kMaxTries = 100;
  constexpr double kMinDepth = 1.0;
  constexpr double deg = std::numbers::pi / 180.0;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SynthDataset out;
  for (int fi = 0; fi < cfg.n_frames; ++fi) {
    Frame frame;
    frame.frame_id = detail::numbered("frame", fi, 4);
    frame.cameras = cfg.rig;
    FrameTruth ft;
    ft.frame_id = frame.frame_id;

    for (int k = 0; k < cfg.objects_per_frame; ++k) {
      for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        const auto cam_idx = static_cast<std::size_t>(
            std::min<double>(std::floor(unit(rng) * static_cast<double>(cfg.rig.size())),
                             static_cast<double>(cfg.rig.size() - 1)));
        const CameraModel& cam = cfg.rig[cam_idx];
        const Vec3 eye = cam.optical_center();
        const double bearing = camera_heading(cam) + uniform(-25.0, 25.0) * deg;
        const double range = uniform(8.0, 35.0);

        Box3D truth;
        truth.l = uniform(3.8, 5.2);
        truth.w = uniform(1.7, 2.1);
        truth.h = uniform(1.4, 2.0);
        truth.x = eye.x() + range * std::cos(bearing);
        truth.y = eye.y() + range * std::sin(bearing);
        truth.z = truth.h / 2;
        truth.yaw = normalize_angle(uniform(-std::numbers::pi, std::numbers::pi));

        RefineParams d;
        d.d_l = uniform(cfg.param_lo, cfg.param_hi);
        d.d_r = uniform(cfg.param_lo, cfg.param_hi);
        d.d_u = uniform(cfg.param_lo, cfg.param_hi);
        d.d_d = uniform(cfg.param_lo, cfg.param_hi);
        const double nx = gauss(rng), ny = gauss(rng), nyaw = gauss(rng);
        const bool with_gt = unit(rng) < cfg.gt2d_fraction;

        if (!detail::corners_in_front(cam, truth, kMinDepth)) continue;
        ViewCategory cat;
        try {
          cat = classify_view(truth, eye);
        } catch (const Error&) {
          continue;
        }

        Box3D stored;
        try {
          stored = detail::plant_inverse(truth, cat, cam, d);
          if (classify_view(stored, eye) != cat) continue;
          const AnchorSpec spec = anchor_spec(stored, cat, cam);
          if (!detail::boxes_close(apply_refinement(stored, spec, d), truth, 1e-9)) continue;
        } catch (const Error&) {
          continue;
        }
        stored.x += cfg.pose_noise_translation * nx;
        stored.y += cfg.pose_noise_translation * ny;
        stored.yaw = normalize_angle(stored.yaw + cfg.pose_noise_yaw * nyaw);
        if (!detail::corners_in_front(cam, stored, kMinDepth)) continue;
        try {
          classify_view(stored, eye);
        } catch (const Error&) {
          continue;
        }

        ObjectRecord obj;
        obj.object_id = detail::numbered("obj", static_cast<int>(frame.objects.size()), 3);
        obj.box3d = stored;
        const Box2D target = project_box(cam, truth).box;
        if (with_gt) obj.gt_box2d[cam.name] = target;
        frame.objects.push_back(obj);
        ft.objects.push_back({obj.object_id, cam.name, d, truth, target});
        break;
      }
    }
    out.frames.push_back(std::move(frame));
    out.truth.push_back(std::move(ft));
  }
  return out;
}

}  // namespace cuboidfit
