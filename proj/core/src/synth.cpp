#include "pointfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Geometry>
#include <json.hpp>

#include "pointfuse/correspondence.hpp"
#include "pointfuse/errors.hpp"
#include "pointfuse/rng.hpp"
#include "pointfuse/scene_io.hpp"

namespace pointfuse {

namespace {

/// Ring geometry: cameras at this distance from the origin, scene points
/// unprojected from view 0 at depths in [kDepthMin, kDepthMax]. With the
/// active window below, every generated point stays well inside every
/// ring camera's image for all accepted dimensions and aspect ratios.
constexpr double kRingRadius = 6.0;
constexpr double kDepthMin = 5.75;
constexpr double kDepthMax = 6.25;

/// SfM pixels and label strips live in a central window spanning 22% of
/// each image dimension (integer arithmetic, no float rounding).
constexpr int kActiveNumerator = 22;
constexpr int kActiveDenominator = 100;

/// Independent stream tags under the SceneSpec seed; strip r draws from
/// kStreamStripBase + r, region transform r from kStreamTransformBase + r.
constexpr std::uint64_t kStreamDepth = 0;
constexpr std::uint64_t kStreamNoise = 1;
constexpr std::uint64_t kStreamGrossSelect = 2;
constexpr std::uint64_t kStreamGrossPosition = 3;
constexpr std::uint64_t kStreamStripBase = 4;
constexpr std::uint64_t kStreamTransformBase = 100;

constexpr std::array<Rgb, 8> kRegionPalette{{{230, 25, 75},
                                             {60, 180, 75},
                                             {255, 225, 25},
                                             {0, 130, 200},
                                             {245, 130, 48},
                                             {145, 30, 180},
                                             {70, 240, 240},
                                             {240, 50, 230}}};

struct ActiveWindow {
  int u0 = 0;
  int v0 = 0;
  int width = 0;
  int height = 0;
};

ActiveWindow active_window(int image_width, int image_height) {
  ActiveWindow w;
  w.width = image_width * kActiveNumerator / kActiveDenominator;
  w.height = image_height * kActiveNumerator / kActiveDenominator;
  w.u0 = (image_width - w.width) / 2;
  w.v0 = (image_height - w.height) / 2;
  return w;
}

int region_point_count(const SceneSpec& spec, int region) {
  // Region 0 carries a 2x majority so one region dominates the robust
  // global fit instead of leaving the winner to sampling luck.
  if (region == 0 && spec.num_regions >= 2) return 2 * spec.points_per_region;
  return spec.points_per_region;
}

void validate_spec(const SceneSpec& spec) {
  const auto fail = [](const std::string& why) {
    throw InvalidSpecError("invalid scene spec: " + why);
  };
  if (spec.num_regions < 1) fail("need at least 1 region");
  if (spec.points_per_region < 1) fail("need at least 1 point per region");
  if (spec.region_transforms.size() != static_cast<std::size_t>(spec.num_regions)) {
    fail("need exactly one transform per region");
  }
  for (const SimTransform& t : spec.region_transforms) {
    if (!(t.scale > 0.0) || !std::isfinite(t.scale) || !is_finite(t.translation)) {
      fail("region transforms must have positive finite scale and finite translation");
    }
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    fail("noise sigma must be non-negative");
  }
  if (!(spec.outlier_fraction >= 0.0) || !(spec.outlier_fraction < 1.0)) {
    fail("outlier fraction must lie in [0, 1)");
  }
  if (spec.num_cameras < 1) fail("need at least 1 camera");
  if (spec.image_width < 32 || spec.image_height < 32) {
    fail("image dimensions must be at least 32");
  }
  if (spec.image_width > 2 * spec.image_height ||
      spec.image_height > 2 * spec.image_width) {
    fail("aspect ratio must stay within [1/2, 2]");
  }
  const ActiveWindow win = active_window(spec.image_width, spec.image_height);
  if (win.width < spec.num_regions) {
    fail("image too narrow for " + std::to_string(spec.num_regions) + " regions");
  }
  for (int r = 0; r < spec.num_regions; ++r) {
    const int su0 = win.width * r / spec.num_regions;
    const int su1 = win.width * (r + 1) / spec.num_regions;
    const long long capacity = static_cast<long long>(su1 - su0) * win.height;
    if (capacity < region_point_count(spec, r)) {
      fail("strip " + std::to_string(r) + " cannot hold " +
           std::to_string(region_point_count(spec, r)) + " distinct pixels");
    }
  }
}

CameraView make_ring_camera(int view_id, int num_cameras, int image_width,
                            int image_height) {
  const double theta =
      2.0 * 3.14159265358979323846 * view_id / static_cast<double>(num_cameras);
  const Point3 position(kRingRadius * std::cos(theta), kRingRadius * std::sin(theta),
                        0.0);
  const Point3 up(0.0, 0.0, 1.0);
  const Point3 forward = (-position).normalized();
  const Point3 right = up.cross(forward).normalized();
  const Point3 down = forward.cross(right);
  Eigen::Matrix3d camera_to_world;
  camera_to_world.col(0) = right;
  camera_to_world.col(1) = down;
  camera_to_world.col(2) = forward;

  SimTransform c2w;
  c2w.scale = 1.0;
  c2w.rotation = Rotation3::from_matrix(camera_to_world);
  c2w.translation = position;

  CameraView cam;
  cam.view_id = view_id;
  cam.world_to_camera = invert_sim3(c2w);
  cam.fx = cam.fy = static_cast<double>(std::max(image_width, image_height));
  cam.cx = image_width / 2.0;
  cam.cy = image_height / 2.0;
  cam.width = image_width;
  cam.height = image_height;
  return cam;
}

Point3 unproject(const SimTransform& camera_to_world, const CameraView& cam, int u,
                 int v, double depth) {
  const Point3 p_cam((u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth,
                     depth);
  return apply_sim3(camera_to_world, p_cam);
}

}  // namespace

std::vector<SimTransform> default_region_transforms(std::uint64_t seed,
                                                    int num_regions) {
  std::vector<SimTransform> out;
  out.reserve(static_cast<std::size_t>(std::max(num_regions, 0)));
  for (int r = 0; r < num_regions; ++r) {
    SplitMix64 rng(derive_stream(seed, kStreamTransformBase + static_cast<std::uint64_t>(r)));
    Point3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    if (axis.norm() < 1e-9) axis = Point3(0.0, 0.0, 1.0);
    // Region 0 stays closer to identity than the rest so the global fit
    // and the local fits remain visually distinguishable in outputs.
    const double angle = r == 0 ? rng.uniform(0.1, 0.3) : rng.uniform(0.25, 0.6);
    SimTransform t;
    t.rotation = Rotation3::axis_angle(axis, angle);
    t.scale = rng.uniform(0.9, 1.2);
    t.translation =
        Point3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    out.push_back(t);
  }
  return out;
}

GroundTruthBundle generate(const SceneSpec& spec) {
  validate_spec(spec);
  const int W = spec.image_width;
  const int H = spec.image_height;
  const std::size_t grid = static_cast<std::size_t>(W) * static_cast<std::size_t>(H);
  const ActiveWindow win = active_window(W, H);

  GroundTruthBundle bundle;
  bundle.spec = spec;

  for (int c = 0; c < spec.num_cameras; ++c) {
    bundle.scene.cameras.push_back(make_ring_camera(c, spec.num_cameras, W, H));
  }
  const CameraView& cam0 = bundle.scene.cameras.front();
  const SimTransform cam0_to_world = invert_sim3(cam0.world_to_camera);

  // Per-pixel depth field, then the world-frame target grid.
  std::vector<double> depth(grid);
  {
    SplitMix64 rng(derive_stream(spec.seed, kStreamDepth));
    for (double& d : depth) d = rng.uniform(kDepthMin, kDepthMax);
  }
  bundle.true_targets.resize(grid);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * W + u;
      bundle.true_targets[i] = unproject(cam0_to_world, cam0, u, v, depth[i]);
    }
  }

  // Label strips: vertical bands of the active window; strip 0 and all
  // background pixels stay label 0 (the unlabeled / refusal region), so
  // masks exist only for regions 1..n-1.
  bundle.labelmap.width = W;
  bundle.labelmap.height = H;
  bundle.labelmap.labels.assign(grid, 0);
  const auto strip_bounds = [&](int r) {
    return std::pair<int, int>{win.u0 + win.width * r / spec.num_regions,
                               win.u0 + win.width * (r + 1) / spec.num_regions};
  };
  for (int r = 1; r < spec.num_regions; ++r) {
    const auto [su0, su1] = strip_bounds(r);
    for (int v = win.v0; v < win.v0 + win.height; ++v) {
      for (int u = su0; u < su1; ++u) {
        bundle.labelmap.labels[static_cast<std::size_t>(v) * W + u] =
            static_cast<std::uint16_t>(r);
      }
    }
  }

  // Dense grid: each pixel's target pushed through the inverse of its
  // region's transform, plus isotropic Gaussian noise.
  std::vector<SimTransform> inverse_transforms;
  inverse_transforms.reserve(spec.region_transforms.size());
  for (const SimTransform& t : spec.region_transforms) {
    inverse_transforms.push_back(invert_sim3(t));
  }
  bundle.pointmap.view_id = 0;
  bundle.pointmap.width = W;
  bundle.pointmap.height = H;
  bundle.pointmap.points.resize(grid);
  {
    SplitMix64 rng(derive_stream(spec.seed, kStreamNoise));
    for (std::size_t i = 0; i < grid; ++i) {
      const int region = bundle.labelmap.labels[i];
      Point3 p = apply_sim3(inverse_transforms[static_cast<std::size_t>(region)],
                            bundle.true_targets[i]);
      if (spec.noise_sigma > 0.0) {
        p += spec.noise_sigma * Point3(rng.gaussian(), rng.gaussian(), rng.gaussian());
      }
      bundle.pointmap.points[i] = p;
    }
  }

  // SfM points: distinct pixels per strip, the exact (noise-free) world
  // target at each. Tracks come from real projections into every camera.
  std::int64_t next_id = 0;
  for (int r = 0; r < spec.num_regions; ++r) {
    const auto [su0, su1] = strip_bounds(r);
    const int strip_w = su1 - su0;
    const std::size_t cells =
        static_cast<std::size_t>(strip_w) * static_cast<std::size_t>(win.height);
    const int want = region_point_count(spec, r);

    SplitMix64 rng(
        derive_stream(spec.seed, kStreamStripBase + static_cast<std::uint64_t>(r)));
    std::vector<std::size_t> pool(cells);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (int k = 0; k < want; ++k) {
      const std::size_t j =
          static_cast<std::size_t>(k) +
          static_cast<std::size_t>(rng.below(cells - static_cast<std::size_t>(k)));
      std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
      const std::size_t cell = pool[static_cast<std::size_t>(k)];
      const int u = su0 + static_cast<int>(cell % static_cast<std::size_t>(strip_w));
      const int v = win.v0 + static_cast<int>(cell / static_cast<std::size_t>(strip_w));
      const std::size_t pix = static_cast<std::size_t>(v) * W + u;

      SfMPoint point;
      point.id = next_id;
      point.position = bundle.true_targets[pix];
      point.color = kRegionPalette[static_cast<std::size_t>(r) % kRegionPalette.size()];
      for (const CameraView& cam : bundle.scene.cameras) {
        const auto proj = project_point(cam, point.position);
        if (!proj || !(proj->x() >= 0.0) || !(proj->x() < cam.width) ||
            !(proj->y() >= 0.0) || !(proj->y() < cam.height)) {
          throw InvalidSpecError("generated point left a camera's field of view");
        }
        point.track.push_back(TrackEntry{cam.view_id, proj->x(), proj->y()});
      }
      bundle.scene.points.push_back(std::move(point));

      TruthRecord rec;
      rec.sfm_id = next_id;
      rec.pixel = Pixel{u, v};
      rec.region = r;
      rec.true_target = bundle.true_targets[pix];
      rec.gross_outlier = false;
      rec.inlier = (r == 0);
      bundle.truth.push_back(rec);
      ++next_id;
    }
  }

  // Gross outliers: replace the dense side of a seeded sample of
  // correspondences with uniform points inside the clean cloud's box.
  const std::size_t total = bundle.truth.size();
  const auto gross_count = static_cast<std::size_t>(
      std::floor(spec.outlier_fraction * static_cast<double>(total)));
  if (gross_count > 0) {
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    SplitMix64 select_rng(derive_stream(spec.seed, kStreamGrossSelect));
    std::vector<std::size_t> chosen(gross_count);
    for (std::size_t k = 0; k < gross_count; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(select_rng.below(total - k));
      std::swap(pool[k], pool[j]);
      chosen[k] = pool[k];
    }
    std::sort(chosen.begin(), chosen.end());

    Point3 lo = bundle.pointmap.points.front();
    Point3 hi = lo;
    for (const Point3& p : bundle.pointmap.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    SplitMix64 pos_rng(derive_stream(spec.seed, kStreamGrossPosition));
    for (std::size_t idx : chosen) {
      TruthRecord& rec = bundle.truth[idx];
      rec.gross_outlier = true;
      rec.inlier = false;
      bundle.pointmap.at(rec.pixel.u, rec.pixel.v) =
          Point3(pos_rng.uniform(lo.x(), hi.x()), pos_rng.uniform(lo.y(), hi.y()),
                 pos_rng.uniform(lo.z(), hi.z()));
    }
  }
  return bundle;
}

ScoreReport score(const GroundTruthBundle& bundle, const FusedCloud& fused) {
  const std::size_t grid = static_cast<std::size_t>(bundle.pointmap.width) *
                           static_cast<std::size_t>(bundle.pointmap.height);
  if (fused.points.size() != grid + bundle.scene.points.size()) {
    throw IndexMismatchError("fused cloud must hold one point per pixel plus the SfM points");
  }
  for (std::size_t i = 0; i < grid; ++i) {
    if (fused.points[i].origin == PointOrigin::Sfm) {
      throw IndexMismatchError("fused cloud's leading points must be the dense grid");
    }
  }

  std::vector<std::uint8_t> gross(grid, 0);
  for (const TruthRecord& rec : bundle.truth) {
    if (rec.gross_outlier) {
      gross[bundle.pointmap.index(rec.pixel.u, rec.pixel.v)] = 1;
    }
  }

  bool any_local = false;
  double sum2 = 0.0;
  std::size_t count = 0;
  std::map<int, std::pair<double, std::size_t>> per_region;
  for (std::size_t i = 0; i < grid; ++i) {
    if (fused.points[i].origin == PointOrigin::DenseLocal) any_local = true;
    if (gross[i]) continue;
    const double d2 = (fused.points[i].position - bundle.true_targets[i]).squaredNorm();
    sum2 += d2;
    ++count;
    auto& [rsum, rcount] = per_region[bundle.labelmap.labels[i]];
    rsum += d2;
    ++rcount;
  }

  ScoreReport report;
  const double rmse =
      count > 0 ? std::sqrt(sum2 / static_cast<double>(count)) : 0.0;
  if (any_local) {
    report.rmse_semantic = rmse;
  } else {
    report.rmse_global_only = rmse;
  }
  for (const auto& [region, acc] : per_region) {
    report.rmse_per_region[region] =
        std::sqrt(acc.first / static_cast<double>(acc.second));
  }

  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (const TruthRecord& rec : bundle.truth) {
    const std::size_t i = bundle.pointmap.index(rec.pixel.u, rec.pixel.v);
    const bool predicted = fused.points[i].origin == PointOrigin::DenseGlobal;
    if (predicted && rec.inlier) ++tp;
    if (predicted && !rec.inlier) ++fp;
    if (!predicted && rec.inlier) ++fn;
  }
  report.inlier_precision =
      tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  report.inlier_recall =
      tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  return report;
}

namespace {

nlohmann::ordered_json transform_to_json(const SimTransform& t) {
  nlohmann::ordered_json j;
  j["s"] = t.scale;
  nlohmann::ordered_json r = nlohmann::ordered_json::array();
  const Eigen::Matrix3d& m = t.rotation.matrix();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.push_back(m(row, col));
  }
  j["R"] = std::move(r);
  j["t"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return j;
}

}  // namespace

void write_bundle(const GroundTruthBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_pointmap(bundle.pointmap, dir / "pointmap.pmap");
  write_labelmap(bundle.labelmap, dir / "labelmap.pgm");
  write_cameras_file(bundle.scene.cameras, dir / "cameras.txt");
  write_points_file(bundle.scene.points, dir / "points.txt");

  nlohmann::ordered_json j;
  j["width"] = bundle.spec.image_width;
  j["height"] = bundle.spec.image_height;
  j["num_regions"] = bundle.spec.num_regions;
  j["points_per_region"] = bundle.spec.points_per_region;
  j["num_cameras"] = bundle.spec.num_cameras;
  j["noise_sigma"] = bundle.spec.noise_sigma;
  j["outlier_fraction"] = bundle.spec.outlier_fraction;
  j["seed"] = bundle.spec.seed;
  nlohmann::ordered_json transforms = nlohmann::ordered_json::array();
  for (const SimTransform& t : bundle.spec.region_transforms) {
    transforms.push_back(transform_to_json(t));
  }
  j["region_transforms"] = std::move(transforms);
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const TruthRecord& rec : bundle.truth) {
    nlohmann::ordered_json rj;
    rj["sfm_id"] = rec.sfm_id;
    rj["u"] = rec.pixel.u;
    rj["v"] = rec.pixel.v;
    rj["region"] = rec.region;
    rj["true_target"] = {rec.true_target.x(), rec.true_target.y(),
                         rec.true_target.z()};
    rj["gross_outlier"] = rec.gross_outlier;
    rj["inlier"] = rec.inlier;
    records.push_back(std::move(rj));
  }
  j["records"] = std::move(records);

  std::ofstream out(dir / "truth.json", std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + (dir / "truth.json").string() + " for writing");
  }
  out << j.dump(2) << "\n";
  if (!out.good()) {
    throw IoError("write failed for " + (dir / "truth.json").string());
  }
}

}  // namespace pointfuse
