#pragma once

// Geometric refinement of a single box against a 2D target.

#include <array>

#include "cuboidfit/anchor.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"
#include "cuboidfit/loss.hpp"
#include "cuboidfit/nelder_mead.hpp"

namespace cuboidfit {

/// Objective value reported when a candidate box falls behind the camera.
inline constexpr double kBehindCameraPenalty = 1e9;

struct RefineResult {
  RefineParams params;
  Box3D refined_box;
  double iou_before = 0;
  double iou_after = 0;
  double objective_value = 0;
  int iterations = 0;
  bool converged = false;

  bool operator==(const RefineResult&) const = default;
};

/// Legality-masked Huber loss of the refined box's projection against `target`.
inline double objective(const Box3D& b, const AnchorSpec& spec, const CameraModel& cam,
                        const Box2D& target, const RefineParams& d, double delta) {
  const Box3D refined = apply_refinement(b, spec, d);
  try {
    return masked_edge_loss(project_box(cam, refined), target, delta);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EntirelyBehindCamera) throw;
    return kBehindCameraPenalty;
  }
}

inline double projected_iou(const CameraModel& cam, const Box3D& b, const Box2D& target) {
  try {
    return iou_2d(project_box(cam, b).box, target);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EntirelyBehindCamera) throw;
    return 0.0;
  }
}

/// Solves for the anchor-edge scales that best align `b`'s projection in
/// `cam` with `target`. Falls back to the identity refinement when the solve
/// would lower the 2D IoU.
inline RefineResult refine_box(const Box3D& b, const CameraModel& cam, const Box2D& target,
                               const SolverConfig& cfg = {}, double delta = 1.0,
                               const RefineParams& start = RefineParams::identity()) {
  validate(cfg);
  if (cfg.lower_bound < 0 || cfg.upper_bound > 2) {
    throw Error(ErrorCode::InvalidArgument, "solver bounds must lie within [0, 2]");
  }
  if (!(delta > 0)) throw Error(ErrorCode::InvalidArgument, "huber delta must be > 0");

  const ViewCategory cat = classify_view(b, cam.optical_center());
  const ProjectedBox initial = project_box(cam, b);
  const AnchorSpec spec = anchor_spec(b, cat, cam);

  const auto f = [&](const std::array<double, 4>& x) {
    return objective(b, spec, cam, target, RefineParams::from_array(x), delta);
  };
  const auto nm = nelder_mead<4>(f, start.to_array(), cfg);

  RefineResult out;
  out.iterations = nm.iterations;
  out.converged = nm.converged;
  out.iou_before = iou_2d(initial.box, target);
  out.params = RefineParams::from_array(nm.x);
  out.refined_box = apply_refinement(b, spec, out.params);
  out.iou_after = projected_iou(cam, out.refined_box, target);
  out.objective_value = nm.f;
  if (out.iou_after < out.iou_before) {
    out.params = RefineParams::identity();
    out.refined_box = b;
    out.iou_after = out.iou_before;
    out.objective_value = objective(b, spec, cam, target, out.params, delta);
  }
  return out;
}

}  // namespace cuboidfit
