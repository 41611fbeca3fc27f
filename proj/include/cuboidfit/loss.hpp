#pragma once

// Edge-wise Huber losses for 2D boxes, masked 3D projection loss,
// refinement consistency and the weighted total.

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "cuboidfit/anchor.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

struct LossWeights {
  double lambda1 = 2.0;  // 2D branch, gated by ground-truth availability
  double lambda2 = 3.0;  // 3D projection
  double lambda3 = 1.0;  // consistency
  double huber_delta = 1.0;
};

inline double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

inline double huber_derivative(double r, double delta) {
  if (std::abs(r) <= delta) return r;
  return r > 0 ? delta : -delta;
}

/// Sum of Huber over the four signed edge residuals pred - target.
inline double huber_edges(const Box2D& pred, const Box2D& target, double delta) {
  const auto p = pred.edges();
  const auto t = target.edges();
  double s = 0;
  for (std::size_t i = 0; i < 4; ++i) s += huber(p[i] - t[i], delta);
  return s;
}

inline double loss_2d(std::span<const Box2D> pred, std::span<const Box2D> target, double delta) {
  if (pred.empty()) throw Error(ErrorCode::EmptyBatch, "loss_2d needs at least one box");
  if (pred.size() != target.size()) {
    throw Error(ErrorCode::InvalidArgument, "loss_2d batch sizes differ");
  }
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += huber_edges(pred[i], target[i], delta);
  return s / static_cast<double>(pred.size());
}

/// Legality-masked edge loss for a single projected box.
inline double masked_edge_loss(const ProjectedBox& proj, const Box2D& target, double delta) {
  const auto p = proj.box.edges();
  const auto t = target.edges();
  const auto legal = proj.legal.as_array();
  double s = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (legal[i]) s += huber(p[i] - t[i], delta);
  }
  return s;
}

/// Ground truth is preferred over the pseudo target when both are present.
inline double loss_3d(std::span<const ProjectedBox> proj, std::span<const std::optional<Box2D>> gt,
                      std::span<const std::optional<Box2D>> pseudo, double delta) {
  if (proj.empty()) throw Error(ErrorCode::EmptyBatch, "loss_3d needs at least one box");
  if (gt.size() != proj.size() || pseudo.size() != proj.size()) {
    throw Error(ErrorCode::InvalidArgument, "loss_3d batch sizes differ");
  }
  double s = 0;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const std::optional<Box2D>& target = gt[i] ? gt[i] : pseudo[i];
    if (!target) {
      throw Error(ErrorCode::NoTarget, "box " + std::to_string(i) + " has no 2D target");
    }
    s += masked_edge_loss(proj[i], *target, delta);
  }
  return s / static_cast<double>(proj.size());
}

/// Per-box consistency term; the caller averages over boxes.
inline double loss_consistency(const RefineParams& d, const RefineParams& d_prime,
                               const RefineParams& d_aug, double delta) {
  const auto a = d.to_array();
  const auto p = d_prime.to_array();
  const auto g = d_aug.to_array();
  double s = 0;
  for (std::size_t i = 0; i < 4; ++i) s += huber(a[i] - p[i] * g[i], delta);
  return s;
}

inline double loss_total(double e2d, double e3d, double econ, bool has_gt,
                         const LossWeights& w = {}) {
  const double gated = has_gt ? w.lambda1 * e2d : 0.0;
  return gated + w.lambda2 * e3d + w.lambda3 * econ;
}

}  // namespace cuboidfit
