#pragma once

// Hungarian assignment and IoU-gated proposal / ground-truth matching.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

using CostMatrix = Eigen::MatrixXd;

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double total_cost = 0;
};

namespace detail {

// Shortest augmenting path with potentials; requires rows <= cols.
inline std::vector<int> hungarian_rows_le_cols(const CostMatrix& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost assignment of min(rows, cols) pairs.
inline Assignment hungarian(const CostMatrix& cost) {
  if (!cost.allFinite()) throw Error(ErrorCode::NonFiniteCost, "cost matrix has non-finite entries");
  Assignment out;
  if (cost.rows() == 0 || cost.cols() == 0) return out;
  const bool transpose = cost.rows() > cost.cols();
  const CostMatrix a = transpose ? CostMatrix(cost.transpose()) : cost;
  const auto r2c = detail::hungarian_rows_le_cols(a);
  for (int i = 0; i < static_cast<int>(r2c.size()); ++i) {
    if (transpose) {
      out.pairs.emplace_back(r2c[static_cast<std::size_t>(i)], i);
    } else {
      out.pairs.emplace_back(i, r2c[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [r, c] : out.pairs) out.total_cost += cost(r, c);
  return out;
}

struct MatchPair {
  int proposal = 0;
  int gt = 0;
  double iou = 0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_proposals;
  std::vector<int> unmatched_gt;
  double threshold = 0.3;

  double total_iou() const {
    double s = 0;
    for (const auto& p : pairs) s += p.iou;
    return s;
  }
};

/// Assigns projected proposals to 2D ground truth by maximum total IoU, then
/// drops pairs below `threshold`. Proposals that cannot be projected are
/// left unmatched.
inline MatchResult match_frame(const std::vector<Box3D>& proposals, const CameraModel& cam,
                               const std::vector<Box2D>& gt, double threshold = 0.3) {
  MatchResult out;
  out.threshold = threshold;
  std::vector<int> usable;
  std::vector<Box2D> projected;
  for (int i = 0; i < static_cast<int>(proposals.size()); ++i) {
    try {
      projected.push_back(project_box(cam, proposals[static_cast<std::size_t>(i)]).box);
      usable.push_back(i);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EntirelyBehindCamera) throw;
    }
  }
  std::vector<char> prop_matched(proposals.size(), 0), gt_matched(gt.size(), 0);
  if (!usable.empty() && !gt.empty()) {
    CostMatrix ious(static_cast<Eigen::Index>(usable.size()), static_cast<Eigen::Index>(gt.size()));
    for (std::size_t i = 0; i < usable.size(); ++i) {
      for (std::size_t j = 0; j < gt.size(); ++j) {
        ious(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            iou_2d(projected[i], gt[j]);
      }
    }
    const CostMatrix cost = CostMatrix::Ones(ious.rows(), ious.cols()) - ious;
    for (const auto& [r, c] : hungarian(cost).pairs) {
      const double iou = ious(r, c);
      if (iou < threshold) continue;
      const int prop = usable[static_cast<std::size_t>(r)];
      out.pairs.push_back({prop, c, iou});
      prop_matched[static_cast<std::size_t>(prop)] = 1;
      gt_matched[static_cast<std::size_t>(c)] = 1;
    }
  }
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (!prop_matched[i]) out.unmatched_proposals.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt_matched[j]) out.unmatched_gt.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace cuboidfit
