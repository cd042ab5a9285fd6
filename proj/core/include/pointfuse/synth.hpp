#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "pointfuse/scene.hpp"
#include "pointfuse/semantic.hpp"

namespace pointfuse {

/// Recipe for a piecewise-rigid synthetic scene. Region 0 is the global
/// region; its transform is what a robust global alignment must recover.
/// points_per_region is the SfM sample count for regions 1..n-1; region 0
/// receives twice that (when more than one region exists) so the global
/// fit has a clear majority to lock onto.
struct SceneSpec {
  int num_regions = 1;
  int points_per_region = 30;
  /// One ground-truth transform per region, index-matched; dense points
  /// of region k are the SfM points pushed through the INVERSE of
  /// region_transforms[k], so aligning dense onto SfM recovers it.
  std::vector<SimTransform> region_transforms;
  double noise_sigma = 0.0;
  /// Fraction of SfM correspondences whose dense side is replaced by a
  /// uniform random point inside the clean cloud's bounding box.
  double outlier_fraction = 0.0;
  int num_cameras = 3;
  int image_width = 64;
  int image_height = 64;
  std::uint64_t seed = 0;
};

/// Ground truth for one SfM correspondence.
struct TruthRecord {
  std::int64_t sfm_id = 0;
  Pixel pixel;
  int region = 0;
  /// Where the dense point at this pixel belongs after perfect alignment.
  Point3 true_target = Point3::Zero();
  bool gross_outlier = false;
  /// True when the correspondence should survive the global fit: region 0
  /// and not gross.
  bool inlier = false;
};

struct GroundTruthBundle {
  SceneSpec spec;
  DensePointmap pointmap;
  LabelMap labelmap;
  SfMScene scene;
  std::vector<TruthRecord> truth;
  /// Per-pixel alignment target (row-major grid), for scoring fused
  /// clouds; carries every pixel, not just SfM-sampled ones.
  std::vector<Point3> true_targets;
};

/// Deterministic scene construction: cameras on a ring around the origin,
/// a per-pixel depth field unprojected from view 0 into world targets,
/// vertical label strips inside a central active window, SfM points
/// sampled on distinct pixels per strip, and the dense map displaced per
/// region. Same spec + seed always yields byte-identical bundles.
/// Throws InvalidSpecError for out-of-range or unsatisfiable specs.
GroundTruthBundle generate(const SceneSpec& spec);

/// Region transforms derived from the seed, for spec construction when
/// the caller does not supply explicit ones (the synth CLI path).
std::vector<SimTransform> default_region_transforms(std::uint64_t seed,
                                                    int num_regions);

struct ScoreReport {
  /// Overall dense RMSE to true targets; which field is present depends
  /// on whether any fused point went through a local transform.
  std::optional<double> rmse_global_only;
  std::optional<double> rmse_semantic;
  std::map<int, double> rmse_per_region;
  double inlier_precision = 1.0;
  double inlier_recall = 1.0;
};

/// Scores a fused cloud built from this bundle's inputs. RMSE is over
/// dense points versus the true-target grid, excluding pixels whose
/// correspondence was replaced by a gross outlier (their dense input is
/// unrecoverable by construction). A truth record counts as predicted
/// inlier when its pixel's fused point stayed on the global transform.
/// Throws IndexMismatchError when the fused cloud does not have one point
/// per pixel plus one per SfM point.
ScoreReport score(const GroundTruthBundle& bundle, const FusedCloud& fused);

/// Writes the bundle directory: pointmap.pmap, labelmap.pgm, cameras.txt,
/// points.txt, truth.json.
void write_bundle(const GroundTruthBundle& bundle, const std::filesystem::path& dir);

}  // namespace pointfuse
