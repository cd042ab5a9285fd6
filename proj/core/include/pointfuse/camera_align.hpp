#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pointfuse/geometry.hpp"
#include "pointfuse/ransac.hpp"
#include "pointfuse/scene.hpp"

namespace pointfuse {

/// Camera-to-world orientation and camera center.
struct CameraPose {
  Rotation3 rotation;
  Point3 position = Point3::Zero();
};

/// Inverts a view's world-to-camera map into a CameraPose.
CameraPose camera_pose_from_view(const CameraView& view);

/// Per-camera errors after aligning an estimated camera set to a
/// reference set. Rotation errors are radians; translation errors are
/// scene units. The relative-pose fields are filled by
/// relative_pose_error (rotation in degrees, by convention).
struct PoseErrorReport {
  std::vector<double> rotation_errors;
  std::vector<double> translation_errors;
  double rotation_error_mean = 0.0;
  double translation_error_mean = 0.0;
  double rpe_translation = 0.0;
  double rpe_rotation_deg = 0.0;
};

/// Spread of the camera centers: sqrt of the summed per-axis population
/// variances, floored at 1e-12. Throws EmptyInputError on an empty set.
double camera_cloud_scale(std::span<const CameraPose> poses);

/// Three auxiliary points that pin a camera's orientation for point-based
/// alignment: point j = position + s_cloud * (column j of the rotation).
std::array<Point3, 3> rotation_points(const CameraPose& pose, double s_cloud);

struct CameraAlignOptions {
  /// Augment each camera's position with its three rotation points
  /// (scaled by that camera set's own cloud scale).
  bool use_rotation_points = false;
  /// When set, solve robustly: samples draw whole cameras
  /// (sample_size = number of cameras per sample) and a camera's residual
  /// is the max over its 1 or 4 points.
  std::optional<RansacParams> ransac;
};

/// Aligns est onto ref with a similarity solved over camera-derived point
/// pairs, applies it to est (position through the transform, orientation
/// left-multiplied by the aligning rotation), and reports per-camera
/// rotation/translation errors against ref.
std::pair<SimTransform, PoseErrorReport> align_camera_sets(
    std::span<const CameraPose> est, std::span<const CameraPose> ref,
    const CameraAlignOptions& opts);

/// Relative pose error over consecutive pairs of similarity-normalized
/// trajectories (centroid at origin, mean distance-to-centroid 1):
/// RMS translation difference of the relative motions, and RMS angular
/// difference of the relative rotations in degrees.
std::pair<double, double> relative_pose_error(std::span<const CameraPose> est,
                                              std::span<const CameraPose> ref);

}  // namespace pointfuse
