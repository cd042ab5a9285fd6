#include "pointfuse/camera_align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pointfuse/errors.hpp"
#include "pointfuse/procrustes.hpp"
#include "pointfuse/rng.hpp"

namespace pointfuse {

CameraPose camera_pose_from_view(const CameraView& view) {
  const SimTransform camera_to_world = invert_sim3(view.world_to_camera);
  CameraPose pose;
  pose.rotation = camera_to_world.rotation;
  pose.position = camera_to_world.translation;
  return pose;
}

double camera_cloud_scale(std::span<const CameraPose> poses) {
  if (poses.empty()) {
    throw EmptyInputError("camera cloud scale needs at least one pose");
  }
  const double inv_n = 1.0 / static_cast<double>(poses.size());
  Point3 mean = Point3::Zero();
  for (const CameraPose& p : poses) mean += p.position;
  mean *= inv_n;
  Point3 var = Point3::Zero();
  for (const CameraPose& p : poses) {
    const Point3 d = p.position - mean;
    var += d.cwiseProduct(d);
  }
  var *= inv_n;
  return std::max(std::sqrt(var.sum()), 1e-12);
}

std::array<Point3, 3> rotation_points(const CameraPose& pose, double s_cloud) {
  return {pose.position + s_cloud * pose.rotation.col(0),
          pose.position + s_cloud * pose.rotation.col(1),
          pose.position + s_cloud * pose.rotation.col(2)};
}

namespace {

/// Point pairs grouped per camera: 1 point each, or 4 when rotation
/// points are enabled. Each set uses its own cloud scale so the augmented
/// sets stay related by the same similarity as the positions.
struct CameraPointPairs {
  std::vector<Point3> src;
  std::vector<Point3> dst;
  std::size_t points_per_camera = 1;
};

CameraPointPairs build_pairs(std::span<const CameraPose> est,
                             std::span<const CameraPose> ref,
                             bool use_rotation_points) {
  CameraPointPairs pairs;
  if (!use_rotation_points) {
    for (std::size_t i = 0; i < est.size(); ++i) {
      pairs.src.push_back(est[i].position);
      pairs.dst.push_back(ref[i].position);
    }
    return pairs;
  }
  pairs.points_per_camera = 4;
  const double s_est = camera_cloud_scale(est);
  const double s_ref = camera_cloud_scale(ref);
  for (std::size_t i = 0; i < est.size(); ++i) {
    pairs.src.push_back(est[i].position);
    pairs.dst.push_back(ref[i].position);
    const auto rp_est = rotation_points(est[i], s_est);
    const auto rp_ref = rotation_points(ref[i], s_ref);
    for (int j = 0; j < 3; ++j) {
      pairs.src.push_back(rp_est[static_cast<std::size_t>(j)]);
      pairs.dst.push_back(rp_ref[static_cast<std::size_t>(j)]);
    }
  }
  return pairs;
}

double camera_residual(const SimTransform& model, const CameraPointPairs& pairs,
                       std::size_t camera_index) {
  const std::size_t k = pairs.points_per_camera;
  double worst = 0.0;
  for (std::size_t j = camera_index * k; j < (camera_index + 1) * k; ++j) {
    worst = std::max(worst, (apply_sim3(model, pairs.src[j]) - pairs.dst[j]).norm());
  }
  return worst;
}

/// Robust fit sampling whole cameras; a camera is inlier when its worst
/// point residual is below epsilon. Same retention rules as ransac_align:
/// strict improvement, earlier round wins ties, degenerate samples skipped.
SimTransform camera_ransac(const CameraPointPairs& pairs, std::size_t num_cameras,
                           const RansacParams& params) {
  const auto sample_cams = static_cast<std::size_t>(params.sample_size);
  if (num_cameras < sample_cams) {
    throw TooFewCorrespondencesError("camera alignment needs at least " +
                                     std::to_string(params.sample_size) + " cameras");
  }
  const std::size_t k = pairs.points_per_camera;
  std::vector<std::size_t> pool;
  std::vector<Point3> src(sample_cams * k);
  std::vector<Point3> dst(sample_cams * k);

  bool have_model = false;
  SimTransform best_model;
  std::size_t best_inliers = 0;

  for (int round = 0; round < params.iterations; ++round) {
    SplitMix64 rng(derive_stream(params.seed, static_cast<std::uint64_t>(round)));
    pool.resize(num_cameras);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < sample_cams; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(num_cameras - i));
      std::swap(pool[i], pool[j]);
      const std::size_t cam = pool[i];
      for (std::size_t p = 0; p < k; ++p) {
        src[i * k + p] = pairs.src[cam * k + p];
        dst[i * k + p] = pairs.dst[cam * k + p];
      }
    }
    SimTransform model;
    try {
      model = solve_similarity(src, dst);
    } catch (const DegenerateConfigurationError&) {
      continue;
    }
    std::size_t inliers = 0;
    for (std::size_t c = 0; c < num_cameras; ++c) {
      if (camera_residual(model, pairs, c) < params.epsilon) ++inliers;
    }
    if (!have_model || inliers > best_inliers) {
      have_model = true;
      best_model = model;
      best_inliers = inliers;
    }
  }
  if (!have_model) {
    throw AllSamplesDegenerateError("every camera sample was degenerate");
  }
  return best_model;
}

}  // namespace

std::pair<SimTransform, PoseErrorReport> align_camera_sets(
    std::span<const CameraPose> est, std::span<const CameraPose> ref,
    const CameraAlignOptions& opts) {
  if (est.size() != ref.size()) {
    throw CountMismatchError("estimated and reference camera counts differ: " +
                             std::to_string(est.size()) + " vs " +
                             std::to_string(ref.size()));
  }
  const std::size_t min_cameras = opts.use_rotation_points ? 1 : 3;
  if (est.size() < min_cameras) {
    throw DegenerateConfigurationError(
        "too few cameras to determine the alignment");
  }

  const CameraPointPairs pairs = build_pairs(est, ref, opts.use_rotation_points);
  SimTransform transform;
  if (opts.ransac) {
    transform = camera_ransac(pairs, est.size(), *opts.ransac);
  } else {
    transform = solve_similarity(pairs.src, pairs.dst);
  }

  PoseErrorReport report;
  report.rotation_errors.reserve(est.size());
  report.translation_errors.reserve(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Point3 pos = apply_sim3(transform, est[i].position);
    const Rotation3 rot = transform.rotation * est[i].rotation;
    report.translation_errors.push_back((pos - ref[i].position).norm());
    report.rotation_errors.push_back(
        quat_angle(quat_from_rotation(rot), quat_from_rotation(ref[i].rotation)));
  }
  const auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0
                     : std::accumulate(v.begin(), v.end(), 0.0) /
                           static_cast<double>(v.size());
  };
  report.rotation_error_mean = mean(report.rotation_errors);
  report.translation_error_mean = mean(report.translation_errors);
  return {transform, report};
}

namespace {

/// Centroid to origin, mean distance-to-centroid to 1. Orientation and
/// relative structure are untouched.
std::vector<CameraPose> normalize_trajectory(std::span<const CameraPose> poses) {
  Point3 centroid = Point3::Zero();
  for (const CameraPose& p : poses) centroid += p.position;
  centroid /= static_cast<double>(poses.size());
  double mean_dist = 0.0;
  for (const CameraPose& p : poses) mean_dist += (p.position - centroid).norm();
  mean_dist = std::max(mean_dist / static_cast<double>(poses.size()), 1e-12);

  std::vector<CameraPose> out(poses.begin(), poses.end());
  for (CameraPose& p : out) p.position = (p.position - centroid) / mean_dist;
  return out;
}

}  // namespace

std::pair<double, double> relative_pose_error(std::span<const CameraPose> est,
                                              std::span<const CameraPose> ref) {
  if (est.size() != ref.size()) {
    throw CountMismatchError("estimated and reference camera counts differ: " +
                             std::to_string(est.size()) + " vs " +
                             std::to_string(ref.size()));
  }
  if (est.size() < 2) {
    throw CountMismatchError("relative pose error needs at least 2 poses");
  }
  const std::vector<CameraPose> e = normalize_trajectory(est);
  const std::vector<CameraPose> r = normalize_trajectory(ref);

  double sum_t2 = 0.0;
  double sum_r2 = 0.0;
  const std::size_t pairs = e.size() - 1;
  for (std::size_t i = 0; i < pairs; ++i) {
    // Relative motion pose_i^-1 * pose_{i+1} for camera-to-world poses:
    // rotation R_i^T R_{i+1}, translation R_i^T (p_{i+1} - p_i).
    const Rotation3 dr_e = e[i].rotation.transposed() * e[i + 1].rotation;
    const Rotation3 dr_r = r[i].rotation.transposed() * r[i + 1].rotation;
    const Point3 dt_e = e[i].rotation.transposed() * (e[i + 1].position - e[i].position);
    const Point3 dt_r = r[i].rotation.transposed() * (r[i + 1].position - r[i].position);
    sum_t2 += (dt_e - dt_r).squaredNorm();
    const double ang = quat_angle(quat_from_rotation(dr_e), quat_from_rotation(dr_r));
    sum_r2 += ang * ang;
  }
  const double rpe_t = std::sqrt(sum_t2 / static_cast<double>(pairs));
  const double rpe_r_rad = std::sqrt(sum_r2 / static_cast<double>(pairs));
  return {rpe_t, rpe_r_rad * 180.0 / 3.14159265358979323846};
}

}  // namespace pointfuse
