#pragma once

// Box-bounded Nelder-Mead. Candidate vertices are projected into the bounds
// before every evaluation, so f is never called outside them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "cuboidfit/error.hpp"

namespace cuboidfit {

struct SolverConfig {
  double lower_bound = 0.0;
  double upper_bound = 2.0;
  int max_iter = 1000;
  double simplex_step = 0.05;
  double f_tol = 1e-8;
  double x_tol = 1e-8;
  int restarts = 1;

  /// Margin kept between vertices and the bounds.
  static constexpr double kBoundMargin = 1e-6;

  double lo() const { return lower_bound + kBoundMargin; }
  double hi() const { return upper_bound - kBoundMargin; }
};

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.lower_bound < 1.0 && 1.0 < cfg.upper_bound)) {
    throw Error(ErrorCode::InvalidArgument, "solver bounds must satisfy lower < 1 < upper");
  }
  if (cfg.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (cfg.restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  if (!(cfg.simplex_step > 0)) throw Error(ErrorCode::InvalidArgument, "simplex_step must be > 0");
}

template <std::size_t N>
struct NelderMeadResult {
  std::array<double, N> x{};
  double f = 0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

template <std::size_t N, class F>
class BoundedSimplex {
 public:
  using Point = std::array<double, N>;

  BoundedSimplex(F& f, const SolverConfig& cfg) : f_(f), cfg_(cfg) {}

  Point clamp(Point p) const {
    for (double& v : p) v = std::clamp(v, cfg_.lo(), cfg_.hi());
    return p;
  }

  double eval(const Point& p) const {
    const double v = f_(p);
    if (std::isnan(v)) throw Error(ErrorCode::NonFiniteObjective, "objective returned NaN");
    return v;
  }

  /// Runs one simplex from `x0` for at most `budget` iterations.
  NelderMeadResult<N> run(const Point& x0, int budget) {
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    std::array<Point, N + 1> v;
    std::array<double, N + 1> fv;
    v[0] = clamp(x0);
    for (std::size_t i = 0; i < N; ++i) {
      Point p = v[0];
      p[i] += cfg_.simplex_step;
      // Step inward when the offset would be swallowed by the upper bound.
      if (p[i] > cfg_.hi()) p[i] = v[0][i] - cfg_.simplex_step;
      v[i + 1] = clamp(p);
    }
    for (std::size_t i = 0; i <= N; ++i) fv[i] = eval(v[i]);

    std::array<std::size_t, N + 1> order;
    const auto sort_vertices = [&] {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      std::array<Point, N + 1> v2;
      std::array<double, N + 1> f2;
      for (std::size_t i = 0; i <= N; ++i) {
        v2[i] = v[order[i]];
        f2[i] = fv[order[i]];
      }
      v = v2;
      fv = f2;
    };
    const auto blend = [&](const Point& c, const Point& p, double t) {
      Point out;
      for (std::size_t i = 0; i < N; ++i) out[i] = c[i] + t * (p[i] - c[i]);
      return clamp(out);
    };

    NelderMeadResult<N> res;
    sort_vertices();
    while (res.iterations < budget) {
      if (converged(v, fv)) {
        res.converged = true;
        break;
      }
      ++res.iterations;

      Point centroid{};
      for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < N; ++k) centroid[k] += v[i][k] / static_cast<double>(N);
      }
      const Point& worst = v[N];
      const Point xr = blend(centroid, worst, -kReflect);
      const double fr = eval(xr);

      if (fr < fv[0]) {
        const Point xe = blend(centroid, worst, -kReflect * kExpand);
        const double fe = eval(xe);
        if (fe < fr) {
          v[N] = xe;
          fv[N] = fe;
        } else {
          v[N] = xr;
          fv[N] = fr;
        }
      } else if (fr < fv[N - 1]) {
        v[N] = xr;
        fv[N] = fr;
      } else {
        const bool outside = fr < fv[N];
        const Point xc = outside ? blend(centroid, xr, kContract) : blend(centroid, worst, kContract);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[N])) {
          v[N] = xc;
          fv[N] = fc;
        } else {
          for (std::size_t i = 1; i <= N; ++i) {
            v[i] = blend(v[0], v[i], kShrink);
            fv[i] = eval(v[i]);
          }
        }
      }
      sort_vertices();
    }
    if (!res.converged && converged(v, fv)) res.converged = true;
    res.x = v[0];
    res.f = fv[0];
    return res;
  }

 private:
  bool converged(const std::array<Point, N + 1>& v, const std::array<double, N + 1>& fv) const {
    if (!(fv[N] - fv[0] < cfg_.f_tol)) return false;
    double spread = 0;
    for (std::size_t i = 1; i <= N; ++i) {
      for (std::size_t k = 0; k < N; ++k) spread = std::max(spread, std::abs(v[i][k] - v[0][k]));
    }
    return spread < cfg_.x_tol;
  }

  F& f_;
  const SolverConfig& cfg_;
};

}  // namespace detail

/// Minimizes `f` over the box [lower_bound, upper_bound]^N from `x0`.
/// `cfg.restarts` simplexes are run back to back, each re-seeded at the best
/// point so far, sharing the `max_iter` budget.
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const std::array<double, N>& x0, const SolverConfig& cfg) {
  validate(cfg);
  detail::BoundedSimplex<N, std::remove_reference_t<F>> simplex(f, cfg);
  NelderMeadResult<N> best;
  best.x = simplex.clamp(x0);
  best.f = simplex.eval(best.x);
  int used = 0;
  for (int r = 0; r < cfg.restarts && used < cfg.max_iter; ++r) {
    const auto res = simplex.run(best.x, cfg.max_iter - used);
    used += res.iterations;
    if (res.f <= best.f) {
      best.x = res.x;
      best.f = res.f;
    }
    best.converged = res.converged;
    if (res.converged && res.iterations == 0) break;
  }
  best.iterations = used;
  return best;
}

}  // namespace cuboidfit
