#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "cuboidfit/anchor.hpp"
#include "test_support.hpp"

namespace cf = cuboidfit;
using cf::Box3D;
using cf::RefineParams;
using cf::Vec3;
using cf::testing::Rng;

namespace {

using cf::testing::random_setup;

void expect_box_near(const Box3D& a, const Box3D& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
  EXPECT_NEAR(a.l, b.l, tol);
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.h, b.h, tol);
  EXPECT_EQ(a.yaw, b.yaw);
}

cf::CameraModel camera_at(const Vec3& pos, const Vec3& look_at) {
  const double heading = std::atan2(look_at.y() - pos.y(), look_at.x() - pos.x());
  return cf::make_camera("cam", heading, pos, 1000, 1920, 1080);
}

}  // namespace

TEST(ViewCategory, KindFollowsParity) {
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(cf::ViewCategory{i}.kind() == cf::ViewKind::FrontView, i % 2 == 0);
  }
}

TEST(ClassifyView, Examples) {
  const Box3D b{0, 0, 0, 4, 2, 1.5, 0};
  EXPECT_EQ(cf::classify_view(b, {10, 0, 0}).index, 0);
  EXPECT_EQ(cf::classify_view(b, {10, 10, 0}).index, 1);
  EXPECT_EQ(cf::classify_view(b, {0, 10, 0}).index, 2);
  EXPECT_EQ(cf::classify_view(b, {-10, 10, 0}).index, 3);
  EXPECT_EQ(cf::classify_view(b, {-10, 0, 0}).index, 4);
  EXPECT_EQ(cf::classify_view(b, {-10, -10, 0}).index, 5);
  EXPECT_EQ(cf::classify_view(b, {0, -10, 0}).index, 6);
  EXPECT_EQ(cf::classify_view(b, {10, -10, 0}).index, 7);
  try {
    cf::classify_view(b, {0, 0, 0});
    FAIL();
  } catch (const cf::Error& e) {
    EXPECT_EQ(e.code(), cf::ErrorCode::SensorInsideFootprint);
  }
}

TEST(ClassifyView, FaceSetMatchesNormalVisibility) {
  Rng rng(31);
  for (int i = 0; i < 10000; ++i) {
    const Box3D b = cf::testing::random_box(rng, 5);
    const Vec3 s{cf::testing::uniform(rng, -15, 15), cf::testing::uniform(rng, -15, 15),
                 cf::testing::uniform(rng, -2, 2)};
    if (cf::testing::oracle_inside_footprint(b, s.x(), s.y())) continue;
    const auto cat = cf::classify_view(b, s);
    // Brute force: a face is visible when the sensor is on its outer side.
    std::set<int> want;
    const double c = std::cos(b.yaw), sn = std::sin(b.yaw);
    const std::array<Vec3, 4> normals{Vec3(c, sn, 0), Vec3(-sn, c, 0), Vec3(-c, -sn, 0),
                                      Vec3(sn, -c, 0)};
    const std::array<double, 4> half{b.l / 2, b.w / 2, b.l / 2, b.w / 2};
    for (int f = 0; f < 4; ++f) {
      const Vec3 fc = b.center() + normals[f] * half[f];
      if ((s - fc).dot(normals[f]) > 0) want.insert(f);
    }
    std::set<int> got;
    if (cat.kind() == cf::ViewKind::FrontView) {
      got.insert(cat.index / 2);
    } else {
      got.insert((cat.index - 1) / 2);
      got.insert(((cat.index + 1) / 2) % 4);
    }
    EXPECT_EQ(got, want) << "category " << cat.index;
  }
}

TEST(AnchorSpec, FrontViewFaceCenter) {
  // Yaw pi turns the box's +x face toward the camera at the origin.
  const Box3D b{10, 0, 0, 4, 2, 2, std::numbers::pi};
  const auto cam = camera_at({0, 0, 0}, b.center());
  const auto cat = cf::classify_view(b, cam.optical_center());
  ASSERT_EQ(cat.index, 0);
  const auto spec = cf::anchor_spec(b, cat, cam);
  EXPECT_LT((spec.anchor_point - Vec3(8, 0, 0)).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(spec.edge_up.length, 1.0);
  EXPECT_DOUBLE_EQ(spec.edge_down.length, 1.0);
  EXPECT_DOUBLE_EQ(spec.edge_left.length, 1.0);
  EXPECT_DOUBLE_EQ(spec.edge_right.length, 1.0);
  EXPECT_LT((spec.edge_left.direction + spec.edge_right.direction).norm(), 1e-12);
  EXPECT_EQ(spec.edge_up.direction, Vec3::UnitZ());
  EXPECT_EQ(spec.edge_down.direction, -Vec3::UnitZ());
  // Left edge runs toward +y (image left for a camera looking along +x).
  EXPECT_GT(spec.edge_left.direction.y(), 0.5);
}

TEST(AnchorSpec, CornerViewSharedEdge) {
  const Box3D b{10, 0, 0, 4, 2, 2, 0};
  const auto cam = camera_at({0, 5, 0}, b.center());
  const auto cat = cf::classify_view(b, cam.optical_center());
  ASSERT_EQ(cat.kind(), cf::ViewKind::CornerView);
  const auto spec = cf::anchor_spec(b, cat, cam);
  EXPECT_LT((spec.anchor_point - Vec3(8, 1, 0)).norm(), 1e-12);
  const std::multiset<double> lengths{spec.edge_left.length, spec.edge_right.length};
  EXPECT_EQ(lengths, (std::multiset<double>{2.0, 4.0}));
  EXPECT_NEAR(spec.edge_left.direction.dot(spec.edge_right.direction), 0.0, 1e-9);
  // Seen from (0, 5) the far end (12, 1) of the +x-running edge is further
  // counterclockwise than (8, -1), so it lands on the image left.
  EXPECT_DOUBLE_EQ(spec.edge_left.length, 4.0);
  EXPECT_GT(spec.edge_left.direction.x(), 0.99);
}

TEST(AnchorSpec, RejectsMismatchedCategory) {
  const Box3D b{10, 0, 0, 4, 2, 2, 0};
  const auto cam = camera_at({0, 0, 0}, b.center());
  EXPECT_THROW(cf::anchor_spec(b, cf::ViewCategory{1}, cam), cf::Error);
}

TEST(AnchorSpec, CornerAnchorIsNearestVerticalEdge) {
  Rng rng(32);
  int checked = 0;
  while (checked < 2000) {
    const auto s = random_setup(rng);
    if (s.cat.kind() != cf::ViewKind::CornerView) continue;
    ++checked;
    const auto corners = cf::testing::oracle_corners(s.box);
    const Vec3 eye = s.cam.optical_center();
    double best = 1e300;
    Vec3 mid;
    for (int k = 0; k < 4; ++k) {
      const Vec3 m = (corners[k] + corners[k + 4]) / 2;
      const double d = std::hypot(m.x() - eye.x(), m.y() - eye.y());
      if (d < best) {
        best = d;
        mid = m;
      }
    }
    EXPECT_LT((s.spec.anchor_point - mid).norm(), 1e-9);
  }
}

TEST(AnchorSpec, EdgeInvariants) {
  Rng rng(33);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_setup(rng);
    EXPECT_EQ(s.spec.edge_up.direction, Vec3::UnitZ());
    EXPECT_EQ(s.spec.edge_down.direction, -Vec3::UnitZ());
    EXPECT_EQ(s.spec.edge_left.direction.z(), 0.0);
    EXPECT_EQ(s.spec.edge_right.direction.z(), 0.0);
    EXPECT_NEAR(s.spec.edge_left.direction.norm(), 1.0, 1e-12);
    const double dot = s.spec.edge_left.direction.dot(s.spec.edge_right.direction);
    if (s.cat.kind() == cf::ViewKind::CornerView) {
      EXPECT_NEAR(dot, 0.0, 1e-9);
    } else {
      EXPECT_NEAR(dot, -1.0, 1e-12);
    }
    // Left far end is at smaller image x when both ends project.
    const auto pl = cf::project_point(
        s.cam, s.spec.anchor_point + s.spec.edge_left.direction * s.spec.edge_left.length);
    const auto pr = cf::project_point(
        s.cam, s.spec.anchor_point + s.spec.edge_right.direction * s.spec.edge_right.length);
    if (pl && pr) {
      EXPECT_LE(pl->u, pr->u);
    }
  }
}

TEST(ApplyRefinement, IdentityDoesNothing) {
  Rng rng(34);
  for (int i = 0; i < 10000; ++i) {
    const auto s = random_setup(rng);
    expect_box_near(cf::apply_refinement(s.box, s.spec, RefineParams::identity()), s.box, 1e-12);
  }
}

TEST(ApplyRefinement, VerticalUpdate) {
  const Box3D b{10, 0, 0, 4, 2, 2, std::numbers::pi};
  const auto cam = camera_at({0, 0, 0}, b.center());
  const auto spec = cf::anchor_spec(b, cf::classify_view(b, cam.optical_center()), cam);
  const Box3D r = cf::apply_refinement(b, spec, {1, 1, 1.5, 0.5});
  EXPECT_NEAR(r.h, 2.0, 1e-12);
  EXPECT_NEAR(r.z, 0.5, 1e-12);
  EXPECT_NEAR(r.l, b.l, 1e-12);
  EXPECT_NEAR(r.w, b.w, 1e-12);
  EXPECT_NEAR(r.x, b.x, 1e-12);
  EXPECT_NEAR(r.y, b.y, 1e-12);
}

TEST(ApplyRefinement, FrontViewSlide) {
  const Box3D b{10, 0, 0, 4, 2, 2, std::numbers::pi};
  const auto cam = camera_at({0, 0, 0}, b.center());
  const auto spec = cf::anchor_spec(b, cf::classify_view(b, cam.optical_center()), cam);
  const Box3D r = cf::apply_refinement(b, spec, {0.5, 1.5, 1, 1});
  EXPECT_NEAR(r.w, 2.0, 1e-12);  // face horizontal dimension
  EXPECT_NEAR(r.l, 4.0, 1e-12);  // depth frozen
  const Vec3 shift = r.center() - b.center();
  EXPECT_NEAR(shift.dot(spec.edge_right.direction), 0.5, 1e-12);
  EXPECT_NEAR(shift.z(), 0.0, 1e-12);
  // Face plane (x = 8) is untouched.
  EXPECT_NEAR(r.x - r.l / 2, 8.0, 1e-12);
}

TEST(ApplyRefinement, PlanesYawAndAnchorPreserved) {
  Rng rng(35);
  for (int i = 0; i < 10000; ++i) {
    const auto s = random_setup(rng);
    const RefineParams d = cf::testing::random_params(rng, 0.05, 1.95);
    const Box3D r = cf::apply_refinement(s.box, s.spec, d);
    EXPECT_EQ(r.yaw, s.box.yaw);
    const Vec3 eye = s.cam.optical_center();
    // Signed distances from the camera to every anchored face plane.
    const cf::AnchorSpec rs = cf::refined_spec(s.spec, d);
    for (std::size_t p = 0; p < cf::anchored_planes(s.spec).size(); ++p) {
      const auto before = cf::anchored_planes(s.spec)[p];
      const cf::FaceRef f = s.spec.faces[p];
      const std::array<double, 2> dims_r{r.l, r.w};
      Vec3 face_point_box = Vec3::Zero();
      face_point_box[f.axis] = f.sign * dims_r[f.axis] / 2;
      const Vec3 n = before.normal;
      const double dist_before = before.signed_distance(eye);
      const double dist_after = n.dot(eye - cf::from_box_frame(r, face_point_box));
      EXPECT_NEAR(dist_before, dist_after, 1e-9);
      EXPECT_NEAR(cf::anchored_planes(rs)[p].signed_distance(eye), dist_before, 1e-12);
    }
    // Anchor point stays on the refined box surface.
    EXPECT_NEAR(cf::egocentric_distance(r, s.spec.anchor_point), 0.0, 1e-9);
  }
}

TEST(ApplyRefinement, CornerEdgeLineFixed) {
  Rng rng(36);
  int checked = 0;
  while (checked < 5000) {
    const auto s = random_setup(rng);
    if (s.cat.kind() != cf::ViewKind::CornerView) continue;
    ++checked;
    const Box3D r = cf::apply_refinement(s.box, s.spec, cf::testing::random_params(rng, 0.1, 1.9));
    const Vec3 q = cf::to_box_frame(r, s.spec.anchor_point);
    // The anchor lies on a vertical edge of the refined box.
    EXPECT_NEAR(std::abs(q.x()), r.l / 2, 1e-9);
    EXPECT_NEAR(std::abs(q.y()), r.w / 2, 1e-9);
    EXPECT_LE(std::abs(q.z()), r.h / 2 + 1e-9);
  }
}

TEST(ComposeParams, Examples) {
  const RefineParams d{0.3, 1.7, 0.9, 1.1};
  EXPECT_EQ(cf::compose_params(RefineParams::identity(), d), d);
  const RefineParams c = cf::compose_params({0.5, 0.5, 2 * 0.6, 1}, {2 * 0.9, 1, 1, 1});
  EXPECT_DOUBLE_EQ(c.d_l, 0.9);
  EXPECT_DOUBLE_EQ(c.d_r, 0.5);
  EXPECT_DOUBLE_EQ(c.d_u, 1.2);
  EXPECT_DOUBLE_EQ(c.d_d, 1.0);
  try {
    cf::compose_params({1.5, 1, 1, 1}, {1.5, 1, 1, 1});
    FAIL();
  } catch (const cf::Error& e) {
    EXPECT_EQ(e.code(), cf::ErrorCode::OutOfRange);
  }
}

TEST(ComposeParams, RefinementsComposeMultiplicatively) {
  Rng rng(37);
  for (int i = 0; i < 10000; ++i) {
    const auto s = random_setup(rng);
    const RefineParams d1 = cf::testing::random_params(rng, 0.5, 1.4);
    const RefineParams d2 = cf::testing::random_params(rng, 0.5, 1.4);
    const Box3D once = cf::apply_refinement(s.box, s.spec, d1);
    const Box3D twice = cf::apply_refinement(once, cf::refined_spec(s.spec, d1), d2);
    const Box3D direct = cf::apply_refinement(s.box, s.spec, cf::compose_params(d1, d2));
    expect_box_near(twice, direct, 1e-9);
  }
}
