#pragma once

#include <span>
#include <vector>

#include "pointfuse/geometry.hpp"

namespace pointfuse {

/// Closed-form similarity estimate minimizing
///   sum_i | s * R * source_i + t - target_i |^2
/// (Umeyama's solution: centroids, cross-covariance SVD, reflection fix
/// via diag(1, 1, sign(det(U V^T))), scale = trace(D S) / source variance).
///
/// Throws DegenerateConfigurationError when fewer than 3 pairs are given or
/// the centered source covariance has rank < 2 (rotation unobservable),
/// NonFiniteInputError on non-finite coordinates.
SimTransform solve_similarity(std::span<const Point3> source,
                              std::span<const Point3> target);

/// Per-pair Euclidean distances | apply_sim3(T, source_i) - target_i |.
/// Unsquared, so thresholds compare in scene distance units.
std::vector<double> alignment_residuals(const SimTransform& t,
                                        std::span<const Point3> source,
                                        std::span<const Point3> target);

}  // namespace pointfuse
