#include <vector>

#include <benchmark/benchmark.h>

#include "pointfuse/procrustes.hpp"
#include "pointfuse/ransac.hpp"
#include "pointfuse/rng.hpp"
#include "pointfuse/semantic.hpp"
#include "pointfuse/synth.hpp"

namespace pointfuse {
namespace {

SimTransform bench_transform() {
  SimTransform t;
  t.scale = 1.2;
  t.rotation = Rotation3::axis_angle(Point3(0.3, -1.0, 0.5), 0.7);
  t.translation = Point3(0.5, -0.3, 0.8);
  return t;
}

Point3 bench_point(SplitMix64& rng) {
  return Point3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0));
}

void BM_SolveSimilarity(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(1);
  const SimTransform truth = bench_transform();
  std::vector<Point3> src, dst;
  for (int i = 0; i < n; ++i) {
    src.push_back(bench_point(rng));
    dst.push_back(apply_sim3(truth, src.back()));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_similarity(src, dst));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SolveSimilarity)->Arg(4)->Arg(100)->Arg(10000);

void BM_RansacAlign(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(2);
  const SimTransform truth = bench_transform();
  CorrespondenceSet corr;
  for (int i = 0; i < n; ++i) {
    Correspondence c;
    c.dense_point = bench_point(rng);
    c.sfm_point = apply_sim3(truth, c.dense_point);
    // One pair in five is displaced well outside the inlier gate.
    if (rng.below(5) == 0) c.sfm_point += Point3(0.5, -0.4, 0.3);
    c.pixel = Pixel{i, 0};
    c.sfm_id = i;
    corr.pairs.push_back(c);
  }
  RansacParams params;
  params.sample_size = 4;
  params.epsilon = 0.05;
  params.iterations = 500;
  params.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ransac_align(corr, params));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RansacAlign)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FusePointmap(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  SceneSpec spec;
  spec.num_regions = 5;
  // Few enough points that the 128-wide scene's strips can hold them; the
  // fuse cost under measurement is dominated by the pixel grid.
  spec.points_per_region = 50;
  spec.region_transforms = default_region_transforms(3, 5);
  spec.num_cameras = 3;
  spec.image_width = side;
  spec.image_height = side;
  spec.seed = 3;
  const GroundTruthBundle bundle = generate(spec);

  GlobalAlignment alignment;
  alignment.transform = bundle.spec.region_transforms[0];
  std::vector<BinaryMask> masks;
  for (std::uint16_t label = 1; label <= 4; ++label) {
    BinaryMask m = BinaryMask::empty(side, side);
    for (int v = 0; v < side; ++v) {
      for (int u = 0; u < side; ++u) {
        if (bundle.labelmap.at(u, v) == label) m.set(u, v);
      }
    }
    masks.push_back(std::move(m));
  }
  std::vector<OutlierGroup> groups;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    OutlierGroup g;
    g.mask = masks[i];
    g.local_transform = bundle.spec.region_transforms[i + 1];
    groups.push_back(std::move(g));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fuse(bundle.pointmap, {}, alignment, groups, bundle.scene));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_FusePointmap)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pointfuse

BENCHMARK_MAIN();
