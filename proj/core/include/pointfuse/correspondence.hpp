#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pointfuse/scene.hpp"

namespace pointfuse {

/// One matched pair: the dense pointmap value at the pixel where an SfM
/// point projects in the reference view.
struct Correspondence {
  Point3 dense_point = Point3::Zero();
  Point3 sfm_point = Point3::Zero();
  Pixel pixel;
  std::int64_t sfm_id = 0;
};

struct CorrespondenceSet {
  int reference_view = 0;
  std::vector<Correspondence> pairs;

  std::size_t size() const { return pairs.size(); }
};

/// View with the most visible SfM points (by track membership);
/// ties break to the lowest view id. Throws EmptySceneError when the scene
/// has no cameras or no points.
int select_reference_view(const SfMScene& scene);

/// Pinhole projection. Returns the real-valued pixel, or nullopt when the
/// point lies at or behind the camera plane (z <= 0 in the camera frame).
std::optional<Eigen::Vector2d> project_point(const CameraView& cam, const Point3& p);

/// Projects every SfM point visible in `view` (per its track), rounds to
/// the nearest integer pixel (half away from zero), and pairs in-bounds
/// hits with the pointmap value at that pixel. When several points land on
/// one pixel, the one whose unrounded projection is nearest the pixel
/// center wins; ties break to the lower sfm_id. Output is sorted by sfm_id.
CorrespondenceSet build_correspondences(const SfMScene& scene,
                                        const DensePointmap& pointmap, int view);

}  // namespace pointfuse
