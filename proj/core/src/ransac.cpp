#include "pointfuse/ransac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pointfuse/errors.hpp"
#include "pointfuse/procrustes.hpp"
#include "pointfuse/rng.hpp"

namespace pointfuse {

namespace {

void validate_params(const RansacParams& params) {
  if (params.sample_size < 3) {
    throw InvariantViolationError("sample size must be at least 3");
  }
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw InvariantViolationError("epsilon must be a positive distance");
  }
  if (params.iterations < 1) {
    throw InvariantViolationError("iteration count must be at least 1");
  }
}

/// First `count` entries of a seeded partial Fisher-Yates shuffle of
/// 0..pool_size-1: `count` distinct indices, order determined by `rng`.
std::vector<std::size_t> sample_distinct(SplitMix64& rng, std::size_t pool_size,
                                         std::size_t count,
                                         std::vector<std::size_t>& pool) {
  pool.resize(pool_size);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> picked(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool_size - i));
    std::swap(pool[i], pool[j]);
    picked[i] = pool[i];
  }
  return picked;
}

struct Classification {
  std::vector<std::size_t> inliers;
  std::vector<std::size_t> outliers;
};

Classification classify(const CorrespondenceSet& corr, const SimTransform& model,
                        double epsilon) {
  Classification out;
  for (std::size_t i = 0; i < corr.pairs.size(); ++i) {
    const Correspondence& c = corr.pairs[i];
    const double r = (apply_sim3(model, c.dense_point) - c.sfm_point).norm();
    if (r < epsilon) {
      out.inliers.push_back(i);
    } else {
      out.outliers.push_back(i);
    }
  }
  return out;
}

GlobalAlignment finalize(const CorrespondenceSet& corr, const SimTransform& model,
                         double epsilon, int iterations_run) {
  GlobalAlignment out;
  out.transform = model;
  Classification cls = classify(corr, model, epsilon);
  out.inliers = std::move(cls.inliers);
  out.outliers = std::move(cls.outliers);
  out.outlier_sfm.reserve(out.outliers.size());
  for (std::size_t i : out.outliers) {
    out.outlier_sfm.push_back(corr.pairs[i].sfm_point);
  }
  out.iterations_run = iterations_run;
  return out;
}

}  // namespace

GlobalAlignment ransac_align(const CorrespondenceSet& corr, const RansacParams& params) {
  validate_params(params);
  const std::size_t n = corr.pairs.size();
  const auto sample_size = static_cast<std::size_t>(params.sample_size);
  if (n < sample_size) {
    throw TooFewCorrespondencesError(
        "RANSAC needs at least " + std::to_string(params.sample_size) +
        " correspondences, got " + std::to_string(n));
  }

  std::vector<Point3> sample_src(sample_size);
  std::vector<Point3> sample_dst(sample_size);
  std::vector<std::size_t> pool;

  bool have_model = false;
  SimTransform best_model;
  std::size_t best_inliers = 0;

  for (int round = 0; round < params.iterations; ++round) {
    SplitMix64 rng(derive_stream(params.seed, static_cast<std::uint64_t>(round)));
    const std::vector<std::size_t> picked =
        sample_distinct(rng, n, sample_size, pool);
    for (std::size_t i = 0; i < sample_size; ++i) {
      sample_src[i] = corr.pairs[picked[i]].dense_point;
      sample_dst[i] = corr.pairs[picked[i]].sfm_point;
    }

    SimTransform model;
    try {
      model = solve_similarity(sample_src, sample_dst);
    } catch (const DegenerateConfigurationError&) {
      continue;
    }

    std::size_t inlier_count = 0;
    for (const Correspondence& c : corr.pairs) {
      const double r = (apply_sim3(model, c.dense_point) - c.sfm_point).norm();
      if (r < params.epsilon) ++inlier_count;
    }
    if (!have_model || inlier_count > best_inliers) {
      have_model = true;
      best_model = model;
      best_inliers = inlier_count;
    }
  }

  if (!have_model) {
    throw AllSamplesDegenerateError("every RANSAC sample was degenerate");
  }
  return finalize(corr, best_model, params.epsilon, params.iterations);
}

GlobalAlignment refit_on_inliers(const CorrespondenceSet& corr,
                                 const GlobalAlignment& alignment, double epsilon) {
  std::vector<Point3> src;
  std::vector<Point3> dst;
  src.reserve(alignment.inliers.size());
  dst.reserve(alignment.inliers.size());
  for (std::size_t i : alignment.inliers) {
    src.push_back(corr.pairs[i].dense_point);
    dst.push_back(corr.pairs[i].sfm_point);
  }
  const SimTransform refit = solve_similarity(src, dst);
  return finalize(corr, refit, epsilon, alignment.iterations_run);
}

DensePointmap apply_global(const GlobalAlignment& alignment,
                           const DensePointmap& pointmap) {
  DensePointmap out;
  out.view_id = pointmap.view_id;
  out.width = pointmap.width;
  out.height = pointmap.height;
  out.points.reserve(pointmap.points.size());
  for (const Point3& p : pointmap.points) {
    out.points.push_back(apply_sim3(alignment.transform, p));
  }
  return out;
}

double median_nn_spacing(std::span<const Point3> points) {
  if (points.size() < 2) {
    throw EmptyInputError("nearest-neighbor spacing needs at least 2 points");
  }
  const std::size_t n = points.size();
  std::vector<double> nearest2(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = (points[i] - points[j]).squaredNorm();
      if (d2 < nearest2[i]) nearest2[i] = d2;
      if (d2 < nearest2[j]) nearest2[j] = d2;
    }
  }
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = std::sqrt(nearest2[i]);
  std::sort(dist.begin(), dist.end());
  return n % 2 == 1 ? dist[n / 2] : 0.5 * (dist[n / 2 - 1] + dist[n / 2]);
}

}  // namespace pointfuse
