#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointfuse/correspondence.hpp"
#include "pointfuse/geometry.hpp"

namespace pointfuse {

struct RansacParams {
  int sample_size = 4;
  double epsilon = 0.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
};

struct GlobalAlignment {
  SimTransform transform;
  std::vector<std::size_t> inliers;
  std::vector<std::size_t> outliers;
  std::vector<Point3> outlier_sfm;
  int iterations_run = 0;
};

/// Robust global fit: for each of exactly params.iterations rounds, draw
/// params.sample_size distinct correspondences, fit a similarity on the
/// sample, and count pairs with residual < epsilon. The model with the
/// strictly highest inlier count wins (ties keep the earlier round); the
/// returned partition is recomputed once under that winning model. The
/// winning model itself is the sample fit; no refit on the inlier set.
///
/// Sampling uses per-round streams derived from (seed, round), so the
/// result is independent of evaluation order.
///
/// Throws TooFewCorrespondencesError when |corr| < sample_size and
/// AllSamplesDegenerateError when every round's sample was degenerate.
GlobalAlignment ransac_align(const CorrespondenceSet& corr, const RansacParams& params);

/// Least-squares refit of the winning partition: solve_similarity over the
/// inlier pairs, then reclassification of all pairs under the new model.
GlobalAlignment refit_on_inliers(const CorrespondenceSet& corr,
                                 const GlobalAlignment& alignment, double epsilon);

/// The whole pointmap mapped through the global transform. Inlier-versus-
/// outlier regioning is applied downstream via masks.
DensePointmap apply_global(const GlobalAlignment& alignment,
                           const DensePointmap& pointmap);

/// Median over points of the distance to the nearest other point.
/// Brute force; used to pick scale-relative epsilon defaults.
double median_nn_spacing(std::span<const Point3> points);

}  // namespace pointfuse
