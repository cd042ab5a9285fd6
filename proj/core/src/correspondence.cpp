#include "pointfuse/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pointfuse/errors.hpp"

namespace pointfuse {

int select_reference_view(const SfMScene& scene) {
  if (scene.cameras.empty() || scene.points.empty()) {
    throw EmptySceneError("reference-view selection needs at least one camera and one point");
  }
  std::map<int, std::size_t> visible;
  for (const CameraView& cam : scene.cameras) visible[cam.view_id] = 0;
  for (const SfMPoint& p : scene.points) {
    for (const TrackEntry& te : p.track) {
      const auto it = visible.find(te.view_id);
      if (it != visible.end()) ++it->second;
    }
  }
  // std::map iterates view ids ascending, so strict > keeps the lowest id
  // among count ties.
  int best_view = scene.cameras.front().view_id;
  std::size_t best_count = 0;
  bool first = true;
  for (const auto& [view_id, count] : visible) {
    if (first || count > best_count) {
      best_view = view_id;
      best_count = count;
      first = false;
    }
  }
  return best_view;
}

std::optional<Eigen::Vector2d> project_point(const CameraView& cam, const Point3& p) {
  const Point3 q = apply_sim3(cam.world_to_camera, p);
  if (!(q.z() > 0.0)) {
    return std::nullopt;
  }
  return Eigen::Vector2d(cam.fx * q.x() / q.z() + cam.cx,
                         cam.fy * q.y() / q.z() + cam.cy);
}

namespace {

int round_half_away(double v) {
  return static_cast<int>(std::lround(v));
}

}  // namespace

CorrespondenceSet build_correspondences(const SfMScene& scene,
                                        const DensePointmap& pointmap, int view) {
  if (pointmap.view_id != view) {
    throw ViewMismatchError("pointmap is bound to view " +
                            std::to_string(pointmap.view_id) + ", not view " +
                            std::to_string(view));
  }
  const CameraView* cam = scene.find_camera(view);
  if (cam == nullptr) {
    throw ViewMismatchError("scene has no camera for view " + std::to_string(view));
  }

  struct Candidate {
    Correspondence corr;
    double center_dist2 = 0.0;
  };
  // Keyed by pixel; only the best candidate per pixel survives.
  std::map<std::pair<int, int>, Candidate> by_pixel;

  for (const SfMPoint& p : scene.points) {
    const bool visible = std::any_of(
        p.track.begin(), p.track.end(),
        [view](const TrackEntry& te) { return te.view_id == view; });
    if (!visible) continue;

    const auto proj = project_point(*cam, p.position);
    if (!proj) continue;
    const int u = round_half_away(proj->x());
    const int v = round_half_away(proj->y());
    if (!pointmap.in_bounds(u, v)) continue;

    Candidate cand;
    cand.corr.dense_point = pointmap.at(u, v);
    cand.corr.sfm_point = p.position;
    cand.corr.pixel = Pixel{u, v};
    cand.corr.sfm_id = p.id;
    cand.center_dist2 = (proj->x() - u) * (proj->x() - u) +
                        (proj->y() - v) * (proj->y() - v);

    const auto key = std::make_pair(u, v);
    const auto it = by_pixel.find(key);
    if (it == by_pixel.end()) {
      by_pixel.emplace(key, cand);
    } else if (cand.center_dist2 < it->second.center_dist2 ||
               (cand.center_dist2 == it->second.center_dist2 &&
                cand.corr.sfm_id < it->second.corr.sfm_id)) {
      it->second = cand;
    }
  }

  CorrespondenceSet out;
  out.reference_view = view;
  out.pairs.reserve(by_pixel.size());
  for (const auto& [key, cand] : by_pixel) out.pairs.push_back(cand.corr);
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const Correspondence& a, const Correspondence& b) {
              return a.sfm_id < b.sfm_id;
            });
  return out;
}

}  // namespace pointfuse
