#include "pointfuse/procrustes.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "pointfuse/errors.hpp"

namespace pointfuse {

namespace {

/// Relative eigenvalue cutoff below which the source spread is treated as
/// collinear (rank < 2) and the rotation about the line as unobservable.
constexpr double kRankTolerance = 1e-10;

}  // namespace

SimTransform solve_similarity(std::span<const Point3> source,
                              std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw DegenerateConfigurationError("similarity solve needs equally many source and target points");
  }
  const std::size_t n = source.size();
  if (n < 3) {
    throw DegenerateConfigurationError("similarity solve needs at least 3 point pairs");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_finite(source[i]) || !is_finite(target[i])) {
      throw NonFiniteInputError("similarity solve received non-finite coordinates");
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  Point3 mu_s = Point3::Zero();
  Point3 mu_t = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s *= inv_n;
  mu_t *= inv_n;

  double source_var = 0.0;
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 ds = source[i] - mu_s;
    const Point3 dt = target[i] - mu_t;
    source_var += ds.squaredNorm();
    sigma += dt * ds.transpose();
  }
  source_var *= inv_n;
  sigma *= inv_n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();

  // Source rank check via its own scatter: the SVD of sigma can lose rank
  // from target geometry too, but a collinear source is what makes R
  // ambiguous. Compute source scatter eigenvalues directly.
  {
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Point3 ds = source[i] - mu_s;
      scatter += ds * ds.transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> ssvd(scatter);
    const Eigen::Vector3d ev = ssvd.singularValues();
    if (!(ev(0) > 0.0) || ev(1) <= kRankTolerance * ev(0)) {
      throw DegenerateConfigurationError("source points are collinear or coincident; rotation is not determined");
    }
  }

  Eigen::Vector3d s_diag = Eigen::Vector3d::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    s_diag(2) = -1.0;
  }

  const Eigen::Matrix3d r =
      svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();
  const double scale = d.dot(s_diag) / source_var;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DegenerateConfigurationError("similarity solve produced a non-positive scale");
  }

  SimTransform out;
  out.scale = scale;
  out.rotation = Rotation3::nearest(r);
  out.translation = mu_t - scale * (out.rotation * mu_s);
  return out;
}

std::vector<double> alignment_residuals(const SimTransform& t,
                                        std::span<const Point3> source,
                                        std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw DegenerateConfigurationError("residuals need equally many source and target points");
  }
  std::vector<double> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    out.push_back((apply_sim3(t, source[i]) - target[i]).norm());
  }
  return out;
}

}  // namespace pointfuse
