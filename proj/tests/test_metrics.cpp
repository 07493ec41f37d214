#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "vokit/error.hpp"
#include "vokit/metrics.hpp"

using namespace vokit;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Pose> line(std::size_t n, double step = 1.0) {
  return std::vector<Pose>(n, Pose::translation({0, 0, step}));
}

std::vector<Pose> conjugate(const std::vector<Pose>& rels, const Pose& p) {
  std::vector<Pose> out;
  for (const auto& r : rels) out.push_back(compose(compose(p, r), inverse(p)));
  return out;
}

Trajectory conjugate(const Trajectory& t, const Pose& p) {
  std::vector<Pose> out;
  for (const auto& g : t) out.push_back(compose(compose(p, g), inverse(p)));
  return Trajectory(out);
}

}  // namespace

TEST_CASE("path_length") {
  CHECK(path_length(Trajectory()) == 0.0);
  CHECK(path_length(accumulate(line(10))) == doctest::Approx(10.0).epsilon(1e-15));
  const std::vector<Pose> square(4, {Rotation::about_y(std::numbers::pi / 2), Vec3(0, 0, 5)});
  CHECK(path_length(accumulate(square)) == doctest::Approx(20.0).epsilon(1e-12));

  std::mt19937_64 rng(1);
  std::vector<Pose> rels;
  for (int i = 0; i < 30; ++i) rels.push_back(oracle::random_pose(rng, 1.0));
  const auto dist = cumulative_distances(accumulate(rels));
  CHECK(dist.front() == 0.0);
  for (std::size_t i = 1; i < dist.size(); ++i) CHECK(dist[i] >= dist[i - 1]);
}

TEST_CASE("subsequence_errors") {
  const Trajectory gt = accumulate(line(200));
  CHECK_THROWS_AS(subsequence_errors(gt, accumulate(line(199))), DimensionMismatch);
  CHECK_THROWS_AS(subsequence_errors(Trajectory(), Trajectory()), InvalidArgument);

  SUBCASE("identical trajectories") {
    const auto subs = subsequence_errors(gt, gt);
    CHECK_FALSE(subs.empty());
    for (const auto& s : subs) {
      CHECK(s.t_err == 0.0);
      CHECK(s.r_err == 0.0);
    }
  }

  SUBCASE("end frame is the first reaching the target length") {
    const auto subs = subsequence_errors(gt, gt, {100.0});
    // Starts 0..100 fit on a 200 m line of 1 m steps.
    REQUIRE(subs.size() == 101);
    for (const auto& s : subs) CHECK(s.last - s.first == 100);
    const auto two = subsequence_errors(gt, gt, {100.0, 200.0});
    CHECK(two.size() == 102);
    CHECK(subsequence_errors(gt, gt, {300.0}).empty());
  }

  SUBCASE("uniform scale of 1.1 gives 10 percent") {
    const auto subs = subsequence_errors(gt, accumulate(line(200, 1.1)));
    REQUIRE_FALSE(subs.empty());
    for (const auto& s : subs) {
      CHECK(std::abs(s.t_err - 10.0) < 1e-6);
      CHECK(s.r_err == 0.0);
    }
  }

  SUBCASE("constant yaw bias") {
    // 0.1 deg per 1 m step: n steps over l = n metres rotate by 0.1 n deg,
    // i.e. 10 deg per 100 m for every subsequence.
    std::vector<Pose> est(1000, {Rotation::about_y(0.1 * kDeg), Vec3(0, 0, 1)});
    const Trajectory g = accumulate(line(1000));
    const auto subs = subsequence_errors(g, accumulate(est));
    REQUIRE(subs.size() > 1000);
    for (const auto& s : subs) {
      const double analytic = 0.1 * double(s.last - s.first) / s.length * 100.0;
      CHECK(std::abs(s.r_err - analytic) < 1e-6);
      CHECK(std::abs(s.r_err - 10.0) < 1e-6);
    }
  }

  SUBCASE("a shared rotation of the world frame does not matter") {
    std::mt19937_64 rng(2);
    std::vector<Pose> g_rels, e_rels;
    for (int i = 0; i < 300; ++i) {
      g_rels.push_back({Rotation::about_y(0.01 * std::sin(0.05 * i)), Vec3(0.02, 0, 1.0)});
      e_rels.push_back({Rotation::about_y(0.011 * std::sin(0.05 * i)), Vec3(0.0, 0.01, 1.05)});
    }
    const auto base = subsequence_errors(accumulate(g_rels), accumulate(e_rels));
    const Pose p{Rotation::unchecked(oracle::random_rotation(rng)), Vec3::Zero()};
    const auto moved = subsequence_errors(accumulate(conjugate(g_rels, p)), accumulate(conjugate(e_rels, p)));
    REQUIRE(base.size() == moved.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(std::abs(base[i].t_err - moved[i].t_err) < 1e-6);
      CHECK(std::abs(base[i].r_err - moved[i].r_err) < 1e-6);
    }
  }
}

TEST_CASE("ate") {
  const Trajectory gt = accumulate(line(9));
  CHECK(ate(gt, gt) == 0.0);
  CHECK_THROWS_AS(ate(gt, accumulate(line(8))), DimensionMismatch);

  SUBCASE("lateral offset from the second frame on") {
    for (std::size_t steps : {1u, 4u, 9u, 50u}) {
      std::vector<Pose> est = line(steps);
      est[0].trans = Vec3(1, 0, 1);
      const double n = double(steps + 1);
      CHECK(ate(accumulate(line(steps)), accumulate(est)) == doctest::Approx(std::sqrt((n - 1) / n)).epsilon(1e-12));
    }
  }

  SUBCASE("two-step scale scenario") {
    const std::vector<Pose> est{Pose::translation({0, 0, 0.5}), Pose::translation({0, 0, 1.5})};
    CHECK(ate(accumulate(line(2)), accumulate(est)) == doctest::Approx(std::sqrt(0.25 / 3)).epsilon(1e-12));
  }

  SUBCASE("constant per-step offset grows the error linearly") {
    // Offsets 0, d, 2d, ... give RMS d * sqrt(sum k^2 / N).
    std::vector<Pose> est = line(20);
    for (auto& p : est) p.trans.x() = 0.1;
    double acc = 0;
    for (int k = 0; k <= 20; ++k) acc += 0.01 * k * k;
    CHECK(ate(accumulate(line(20)), accumulate(est)) == doctest::Approx(std::sqrt(acc / 21)).epsilon(1e-12));
  }

  SUBCASE("rigid alignment removes a rotation about the first frame") {
    std::vector<Pose> rels;
    for (int i = 0; i < 50; ++i) rels.push_back({Rotation::about_y(0.05), Vec3(0.1, 0.0, 1.0)});
    const Trajectory g = accumulate(rels);
    const Trajectory e = conjugate(g, Pose{Rotation::about_y(0.3), Vec3::Zero()});
    CHECK(ate(g, e) > 1.0);
    CHECK(ate(g, e, true) < 1e-9);
    CHECK(ate(g, e, true) <= ate(g, e));
  }
}

TEST_CASE("scale_err") {
  const std::vector<Pose> gt = line(2);
  CHECK(scale_err(gt, gt) == 0.0);
  const std::vector<Pose> est{Pose::translation({0, 0, 0.5}), Pose::translation({0, 0, 1.5})};
  CHECK(std::abs(scale_err(gt, est) - 5.0 / 12.0) < 1e-9);
  CHECK(std::abs(scale_err(est, gt) - 5.0 / 12.0) < 1e-9);
  CHECK(scale_err(gt, std::vector<Pose>(2)) == doctest::Approx(1.0).epsilon(1e-12));
  // Both steps zero: each ratio is 0 / eps, so the formula gives 1.
  CHECK(scale_err(std::vector<Pose>(2), std::vector<Pose>(2)) == 1.0);
  CHECK_THROWS_AS(scale_err(gt, line(3)), DimensionMismatch);
  CHECK_THROWS_AS(scale_err({}, {}), InvalidArgument);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const std::vector<Pose> a{oracle::random_pose(rng), oracle::random_pose(rng)};
    const std::vector<Pose> b{oracle::random_pose(rng), oracle::random_pose(rng)};
    const double v = scale_err(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("evaluate") {
  SUBCASE("identical inputs") {
    const auto r = evaluate(line(250), line(250));
    REQUIRE(r.t_err.has_value());
    CHECK(*r.t_err == 0.0);
    CHECK(*r.r_err == 0.0);
    CHECK(r.ate == 0.0);
    CHECK(r.s_err == 0.0);
    CHECK(r.subseq_count == 151 + 51);
    CHECK(r.per_length.size() == 2);
    CHECK(r.per_length.at(100.0).count == 151);
  }

  SUBCASE("short trajectories have no subsequence errors") {
    const auto r = evaluate(line(20), line(20, 1.1));
    CHECK_FALSE(r.t_err.has_value());
    CHECK_FALSE(r.r_err.has_value());
    CHECK(r.subseq_count == 0);
    CHECK(r.s_err == doctest::Approx(1.0 - 1.0 / 1.1).epsilon(1e-12));
    CHECK(r.ate > 0.0);
  }

  SUBCASE("scaled line aggregates to 10 percent") {
    const auto r = evaluate(line(200), line(200, 1.1));
    REQUIRE(r.t_err.has_value());
    CHECK(std::abs(*r.t_err - 10.0) < 1e-6);
    for (const auto& [len, b] : r.per_length) CHECK(std::abs(b.t_err - 10.0) < 1e-6);
  }

  SUBCASE("empty input") {
    const auto r = evaluate({}, {});
    CHECK(r.ate == 0.0);
    CHECK_FALSE(r.t_err.has_value());
  }

  CHECK_THROWS_AS(evaluate(line(3), line(4)), DimensionMismatch);

  SUBCASE("deterministic and world-frame invariant") {
    std::mt19937_64 rng(4);
    std::vector<Pose> g, e;
    for (int i = 0; i < 150; ++i) {
      g.push_back({Rotation::about_y(0.02), Vec3(0, 0, 0.97)});
      e.push_back({Rotation::about_y(0.021), Vec3(0.01, 0, 0.98)});
    }
    const auto a = evaluate(g, e);
    const auto b = evaluate(g, e);
    CHECK(*a.t_err == *b.t_err);
    CHECK(a.ate == b.ate);
    // Steps of 0.97 m keep subsequence ends away from exact length ties.
    const Pose p{Rotation::axis_angle(Vec3(1, 2, 3), 0.7), Vec3::Zero()};
    const auto c = evaluate(conjugate(g, p), conjugate(e, p));
    CHECK(std::abs(*a.t_err - *c.t_err) < 1e-8);
    CHECK(std::abs(*a.r_err - *c.r_err) < 1e-8);
    CHECK(std::abs(a.ate - c.ate) < 1e-8);
    CHECK(std::abs(a.s_err - c.s_err) < 1e-12);
  }
}
