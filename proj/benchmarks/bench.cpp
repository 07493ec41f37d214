#include <benchmark/benchmark.h>

#include "vokit/camera_geom.hpp"
#include "vokit/matrix_fisher.hpp"
#include "vokit/metrics.hpp"
#include "vokit/photometric_gate.hpp"
#include "vokit/subspace_gate.hpp"
#include "vokit/synth_world.hpp"

using namespace vokit;

namespace {

void BM_LogNormConst(benchmark::State& state) {
  const double s = static_cast<double>(state.range(0));
  const FisherParams p(Vec3(s, 0.6 * s, 0.2 * s).asDiagonal());
  for (auto _ : state) benchmark::DoNotOptimize(log_norm_const(p));
}
BENCHMARK(BM_LogNormConst)->Arg(1)->Arg(10)->Arg(100)->Arg(1000);

struct Frames {
  SceneSpec spec;
  std::vector<Pose> rels;
  Render a, b;
};

Frames frames(bool large) {
  SceneSpec s = random_scene_spec(3);
  if (large) s.intrinsics = large_intrinsics();
  const auto rels = make_trajectory(s);
  const auto traj = accumulate(rels);
  return {s, rels, render(s, traj[0]), render(s, traj[1])};
}

void BM_Ssim(benchmark::State& state) {
  const Frames f = frames(state.range(0) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(f.a.image, f.b.image, &f.b.depth.mask()));
}
BENCHMARK(BM_Ssim)->Arg(0)->Arg(1);

void BM_WarpImage(benchmark::State& state) {
  const Frames f = frames(state.range(0) != 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(warp_image(f.a.image, f.a.depth, f.spec.intrinsics, f.spec.intrinsics, f.rels[0]));
}
BENCHMARK(BM_WarpImage)->Arg(0)->Arg(1);

void BM_GeomGate(benchmark::State& state) {
  const Frames f = frames(state.range(0) != 0);
  const GeomSample g{f.a.image, f.b.image, f.a.depth, f.spec.intrinsics, f.spec.intrinsics, f.rels[0]};
  for (auto _ : state) benchmark::DoNotOptimize(geom_gate(g));
}
BENCHMARK(BM_GeomGate)->Arg(0)->Arg(1);

void BM_SubspaceDistance(benchmark::State& state) {
  const FeatureMatrix a = synthetic_features(1, 0, 0.05), b = synthetic_features(1, 10, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(subspace_distance(a, b));
}
BENCHMARK(BM_SubspaceDistance);

void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Pose> gt, est;
  for (std::size_t i = 0; i < n; ++i) {
    gt.push_back({Rotation::about_y(0.01 * std::sin(0.01 * double(i))), Vec3(0, 0, 1)});
    est.push_back({Rotation::about_y(0.011 * std::sin(0.01 * double(i))), Vec3(0.01, 0, 1.02)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(gt, est));
}
BENCHMARK(BM_Evaluate)->Arg(1000)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
