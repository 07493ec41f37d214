#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vokit/error.hpp"
#include "vokit/synth_world.hpp"

using namespace vokit;
using std::numbers::pi;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

SceneSpec flat_spec() {
  SceneSpec s;
  s.texture_seed = 5;
  s.camera_height = 1.5;
  s.camera_pitch = 0.0;
  return s;
}

}  // namespace

TEST_CASE("SceneSpec validation") {
  SceneSpec s;
  CHECK_NOTHROW(s.validate());
  auto bad = [](auto mutate) {
    SceneSpec t;
    mutate(t);
    return t;
  };
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.frames = 1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.speed = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.camera_height = -1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.octaves = 2; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.texture_scale = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.max_depth = -1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.yaw_rate = std::nan(""); }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SceneSpec& t) { t.intrinsics.fu = 0; }).validate(), InvalidArgument);
  CHECK(large_intrinsics().width == 640);
  CHECK(large_intrinsics().height == 384);
  CHECK(large_intrinsics().valid());
}

TEST_CASE("trajectories") {
  SceneSpec s = flat_spec();
  s.frames = 12;

  SUBCASE("line moves forward at the given speed") {
    s.speed = 0.7;
    const auto rels = make_trajectory(s);
    REQUIRE(rels.size() == 12);
    const auto traj = accumulate(rels);
    CHECK(max_abs(traj[12].trans - Vec3(0, 0, 8.4)) < 1e-12);
    CHECK(geodesic_angle(traj[12].rot) < 1e-15);
  }

  SUBCASE("pitched line keeps a constant height") {
    s.camera_pitch = 0.3;
    const auto traj = accumulate(make_trajectory(s));
    const Pose mount = camera_mount(s);
    for (const auto& g : traj) {
      const Vec3 vehicle = mount.apply(g.trans);
      CHECK(std::abs(vehicle.y()) < 1e-12);
      CHECK(std::abs(vehicle.x()) < 1e-12);
    }
    CHECK(mount.apply(traj[12].trans).z() == doctest::Approx(12 * s.speed).epsilon(1e-12));
  }

  SUBCASE("closed arc returns to the start") {
    s.trajectory = TrajectoryKind::Arc;
    s.camera_pitch = 0.2;
    const auto traj = accumulate(make_trajectory(s));
    CHECK(traj[12].trans.norm() < 1e-9);
    CHECK(geodesic_angle(traj[12].rot) < 1e-9);
    CHECK(geodesic_angle(traj[6].rot) == doctest::Approx(pi).epsilon(1e-9));
    // Chord length of each step on the circle of circumference 12 * speed.
    const double r = 12 * s.speed / (2 * pi);
    for (std::size_t i = 1; i < traj.size(); ++i)
      CHECK((traj[i].trans - traj[i - 1].trans).norm() == doctest::Approx(2 * r * std::sin(pi / 12)).epsilon(1e-12));
  }

  SUBCASE("open arc turns at the yaw rate") {
    s.trajectory = TrajectoryKind::Arc;
    s.yaw_rate = -0.05;
    for (const auto& p : make_trajectory(s)) CHECK(geodesic_angle(p.rot) == doctest::Approx(0.05).epsilon(1e-12));
  }

  SUBCASE("figure eight closes at the middle and at the end") {
    s.trajectory = TrajectoryKind::FigureEight;
    s.frames = 16;
    const auto traj = accumulate(make_trajectory(s));
    CHECK(traj[8].trans.norm() < 1e-9);
    CHECK(traj[16].trans.norm() < 1e-9);
    CHECK(geodesic_angle(traj[16].rot) < 1e-9);
    // The two loops lie on opposite sides of the start.
    CHECK(traj[4].trans.x() * traj[12].trans.x() < 0.0);
  }
}

TEST_CASE("render depth") {
  SceneSpec s = flat_spec();
  const Intrinsics& k = s.intrinsics;

  SUBCASE("ground depth follows the horizon formula") {
    const Render r = render(s, Pose::identity());
    for (std::size_t v = 0; v < k.height; ++v) {
      const double y = static_cast<double>(v);
      for (std::size_t u = 0; u < k.width; u += 17) {
        if (y <= k.cv) {
          CHECK_FALSE(r.depth.valid(u, v));
          CHECK(r.image.at(u, v) == kSkyIntensity);
        } else {
          REQUIRE(r.depth.valid(u, v));
          CHECK(r.depth.at(u, v) == doctest::Approx(s.camera_height * k.fv / (y - k.cv)).epsilon(1e-12));
        }
      }
    }
  }

  SUBCASE("ground depth decreases down the image when pitched") {
    s.camera_pitch = 0.5;
    const Render r = render(s, Pose::identity());
    for (std::size_t u = 0; u < k.width; u += 9)
      for (std::size_t v = 1; v < k.height; ++v)
        if (r.depth.valid(u, v - 1)) CHECK(r.depth.at(u, v) < r.depth.at(u, v - 1));
  }

  SUBCASE("fronto wall has constant depth") {
    s.layout = SceneLayout::PlanePlusWall;
    s.wall_distance = 12.0;
    const Render r = render(s, Pose::identity());
    for (std::size_t v = 0; v < k.height; ++v)
      for (std::size_t u = 0; u < k.width; u += 13) {
        REQUIRE(r.depth.valid(u, v));
        const double ground = static_cast<double>(v) > k.cv ? s.camera_height * k.fv / (double(v) - k.cv) : 1e300;
        CHECK(r.depth.at(u, v) == doctest::Approx(std::min(12.0, ground)).epsilon(1e-12));
      }
  }

  SUBCASE("far clip turns distant ground into sky") {
    s.max_depth = 5.0;
    const Render r = render(s, Pose::identity());
    for (std::size_t v = 0; v < k.height; ++v) {
      const double y = static_cast<double>(v);
      const bool near = y > k.cv && s.camera_height * k.fv / (y - k.cv) <= 5.0;
      CHECK(r.depth.valid(3, v) == near);
    }
    CHECK(ray_depth(s, Pose::identity(), 10.0, k.cv + 1.0) == 0.0);
  }

  SUBCASE("camera must be above the ground") {
    CHECK_THROWS_AS(render(s, Pose::translation({0, 2.0, 0})), InvalidArgument);
    CHECK_THROWS_AS(render(s, Pose::translation({0, 1.5, 0})), InvalidArgument);
    CHECK_NOTHROW(render(s, Pose::translation({0, 1.4, 0})));
  }
}

TEST_CASE("texture") {
  SceneSpec s = flat_spec();
  const Render a = render(s, Pose::identity());
  const Render b = render(s, Pose::identity());
  CHECK(a.image == b.image);
  CHECK(a.depth.values() == b.depth.values());
  for (double v : a.image.data()) {
    CHECK(v >= 0.1);
    CHECK(v <= 0.9);
  }
  s.texture_seed = 6;
  CHECK_FALSE(render(s, Pose::identity()).image == a.image);

  // A ground point looks the same from any camera that sees it.
  s = flat_spec();
  const Pose other{Rotation::about_y(0.2), Vec3(0.3, -0.2, 1.0)};
  const Vec3 p(0.4, 1.5, 6.0);
  const Render c = render(s, other);
  const auto px = s.intrinsics.project(inverse(other).apply(p));
  REQUIRE(px.has_value());
  const Intrinsics& k = s.intrinsics;
  const double u = std::round(px->x()), v = std::round(px->y());
  const double d = ray_depth(s, other, u, v);
  const Vec3 hit = other.trans + d * (other.rot * Vec3((u - k.cu) / k.fu, (v - k.cv) / k.fv, 1.0));
  CHECK(c.image.at(std::size_t(u), std::size_t(v)) == doctest::Approx(texture_at(s, hit)).epsilon(1e-12));
}

TEST_CASE("analytic flow") {
  SceneSpec s = flat_spec();
  s.camera_pitch = 0.3;
  s.frames = 4;
  s.trajectory = TrajectoryKind::Arc;
  s.yaw_rate = 0.04;
  const auto traj = accumulate(make_trajectory(s));
  const Intrinsics& k = s.intrinsics;

  SUBCASE("identity motion is zero flow") {
    const FlowField f = analytic_flow(s, traj[1], traj[1]);
    const Render r = render(s, traj[1]);
    for (std::size_t v = 0; v < k.height; ++v)
      for (std::size_t u = 0; u < k.width; ++u) {
        CHECK(bool(f.valid.at(u, v)) == r.depth.valid(u, v));
        if (f.valid.at(u, v)) CHECK(f.values.at(u, v).norm() < 1e-9);
      }
  }

  SUBCASE("flows compose along a -> b -> c") {
    const FlowField ab = analytic_flow(s, traj[0], traj[1]);
    const FlowField ac = analytic_flow(s, traj[0], traj[2]);
    std::size_t checked = 0;
    for (std::size_t v = 0; v < k.height; ++v)
      for (std::size_t u = 0; u < k.width; ++u) {
        if (!ab.valid.at(u, v) || !ac.valid.at(u, v)) continue;
        const Vec2 pb = Vec2(double(u), double(v)) + ab.values.at(u, v);
        // Flow b -> c at a continuous location, from the exact scene geometry.
        const double d = ray_depth(s, traj[1], pb.x(), pb.y());
        REQUIRE(d > 0.0);
        const auto pc = k.project((inverse(traj[2]) * traj[1]).apply(k.unproject(pb.x(), pb.y(), d)));
        REQUIRE(pc.has_value());
        CHECK((*pc - (Vec2(double(u), double(v)) + ac.values.at(u, v))).norm() < 1e-6);
        ++checked;
      }
    CHECK(checked > k.width * k.height / 4);
  }

  SUBCASE("approaching a wall expands radially") {
    SceneSpec w = flat_spec();
    w.layout = SceneLayout::PlanePlusWall;
    w.wall_distance = 10.0;
    const FlowField f = analytic_flow(w, Pose::identity(), Pose::translation({0, 0, 1}));
    // Wall pixels scale about the principal point by 10 / 9.
    for (std::size_t v = 0; v < 30; v += 3)
      for (std::size_t u = 0; u < k.width; u += 7) {
        if (!f.valid.at(u, v)) continue;
        const Vec2 off(double(u) - k.cu, double(v) - k.cv);
        CHECK((f.values.at(u, v) - off / 9.0).norm() < 1e-9);
      }
    CHECK(f.valid.at(std::size_t(k.cu), 5));
  }

  SUBCASE("pixels leaving the view are invalid") {
    const FlowField f = analytic_flow(s, Pose::identity(), Pose{Rotation::about_y(1.2), Vec3::Zero()});
    std::size_t valid = 0;
    for (auto m : f.valid.data()) valid += m;
    CHECK(valid < k.width * k.height / 4);
  }
}

TEST_CASE("corpus specs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SceneSpec s = random_scene_spec(seed);
    CHECK_NOTHROW(s.validate());
    CHECK(s.max_depth > 0.0);
    const SceneSpec again = random_scene_spec(seed);
    CHECK(again.texture_seed == s.texture_seed);
    CHECK(again.speed == s.speed);
  }
  CHECK(random_scene_spec(1).texture_seed != random_scene_spec(2).texture_seed);
}
