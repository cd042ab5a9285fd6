#include "pointfuse/geometry.hpp"

#include <cmath>

#include <Eigen/Core>
#include <gtest/gtest.h>

#include "pointfuse/errors.hpp"
#include "pointfuse/rng.hpp"
#include "test_util.hpp"

namespace pointfuse {
namespace {

using testutil::random_point;
using testutil::random_rotation;
using testutil::random_transform;
using testutil::random_unit_vector;

constexpr double kPi = 3.14159265358979323846;

/// 4x4 homogeneous matrix of a similarity, the independent arithmetic oracle
/// for apply/compose: H = [[s*R, t], [0, 1]].
Eigen::Matrix4d homogeneous(const SimTransform& t) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = t.scale * t.rotation.matrix();
  h.topRightCorner<3, 1>() = t.translation;
  return h;
}

TEST(ApplySim3, IdentityLeavesPointUnchanged) {
  const Point3 p(3.0, 4.0, 5.0);
  EXPECT_EQ(apply_sim3(SimTransform::identity(), p), p);
}

TEST(ApplySim3, ScaleThenTranslate) {
  SimTransform t;
  t.scale = 2.0;
  t.translation = Point3(1.0, 0.0, 0.0);
  const Point3 out = apply_sim3(t, Point3(1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(out.x(), 3.0);
  EXPECT_DOUBLE_EQ(out.y(), 2.0);
  EXPECT_DOUBLE_EQ(out.z(), 2.0);
}

TEST(ApplySim3, MatchesHomogeneousMatrixOracle) {
  SimTransform t;
  t.scale = 0.7;
  t.rotation = Rotation3::axis_angle(Point3(0, 0, 1), 30.0 * kPi / 180.0);
  t.translation = Point3(1.0, 2.0, 3.0);
  const Eigen::Matrix4d h = homogeneous(t);
  SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Point3 p = random_point(rng, 10.0);
    const Eigen::Vector4d hp = h * Eigen::Vector4d(p.x(), p.y(), p.z(), 1.0);
    EXPECT_LT((apply_sim3(t, p) - hp.head<3>()).norm(), 1e-12);
  }
}

TEST(ComposeSim3, IdentityIsNeutral) {
  SplitMix64 rng(12);
  const SimTransform b = random_transform(rng);
  const SimTransform ab = compose_sim3(SimTransform::identity(), b);
  EXPECT_DOUBLE_EQ(ab.scale, b.scale);
  EXPECT_EQ(ab.rotation.matrix(), b.rotation.matrix());
  EXPECT_EQ(ab.translation, b.translation);
  const SimTransform ba = compose_sim3(b, SimTransform::identity());
  EXPECT_LT(testutil::transform_difference(ba, b), 1e-15);
}

TEST(ComposeSim3, InverseComposesToIdentity) {
  SplitMix64 rng(13);
  for (int i = 0; i < 50; ++i) {
    const SimTransform t = random_transform(rng);
    const SimTransform id = compose_sim3(t, invert_sim3(t));
    EXPECT_NEAR(id.scale, 1.0, 1e-12);
    EXPECT_LT((id.rotation.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_LT(id.translation.norm(), 1e-10 * (1.0 + t.translation.norm()));
  }
}

TEST(ComposeSim3, AgreesWithPointwiseApplication) {
  SplitMix64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const SimTransform a = random_transform(rng);
    const SimTransform b = random_transform(rng);
    const SimTransform ab = compose_sim3(a, b);
    for (int i = 0; i < 100; ++i) {
      const Point3 p = random_point(rng, 5.0);
      const Point3 direct = apply_sim3(a, apply_sim3(b, p));
      EXPECT_LT((apply_sim3(ab, p) - direct).norm(), 1e-10 * (1.0 + direct.norm()));
    }
  }
}

TEST(ComposeSim3, AgreesWithHomogeneousMatrixOracle) {
  SplitMix64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const SimTransform a = random_transform(rng);
    const SimTransform b = random_transform(rng);
    const Eigen::Matrix4d expected = homogeneous(a) * homogeneous(b);
    const Eigen::Matrix4d got = homogeneous(compose_sim3(a, b));
    EXPECT_LT((got - expected).cwiseAbs().maxCoeff(),
              1e-10 * expected.cwiseAbs().maxCoeff());
  }
}

TEST(InvertSim3, Identity) {
  const SimTransform inv = invert_sim3(SimTransform::identity());
  EXPECT_DOUBLE_EQ(inv.scale, 1.0);
  EXPECT_EQ(inv.rotation.matrix(), Eigen::Matrix3d::Identity());
  EXPECT_EQ(inv.translation, Point3::Zero());
}

TEST(InvertSim3, AnalyticCase) {
  SimTransform t;
  t.scale = 2.0;
  t.translation = Point3(1.0, 0.0, 0.0);
  const SimTransform inv = invert_sim3(t);
  EXPECT_DOUBLE_EQ(inv.scale, 0.5);
  EXPECT_EQ(inv.rotation.matrix(), Eigen::Matrix3d::Identity());
  EXPECT_DOUBLE_EQ(inv.translation.x(), -0.5);
  EXPECT_DOUBLE_EQ(inv.translation.y(), 0.0);
  EXPECT_DOUBLE_EQ(inv.translation.z(), 0.0);
}

TEST(InvertSim3, RoundTripsPoints) {
  SplitMix64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const SimTransform t = random_transform(rng);
    const SimTransform inv = invert_sim3(t);
    for (int i = 0; i < 100; ++i) {
      const Point3 p = random_point(rng, 5.0);
      EXPECT_LT((apply_sim3(inv, apply_sim3(t, p)) - p).norm(),
                1e-10 * (1.0 + p.norm()));
    }
  }
}

TEST(InvertSim3, RejectsNonPositiveScale) {
  SimTransform t;
  t.scale = 0.0;
  EXPECT_THROW(invert_sim3(t), InvariantViolationError);
  t.scale = -1.0;
  EXPECT_THROW(invert_sim3(t), InvariantViolationError);
}

TEST(QuatAngle, EqualQuaternionsGiveZero) {
  const Quaternion q{0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(quat_angle(q, q), 0.0);
}

TEST(QuatAngle, NegationGivesZero) {
  const Quaternion q{0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(quat_angle(q, q.negated()), 0.0);
}

TEST(QuatAngle, NinetyDegreesAboutZ) {
  const Quaternion id{1.0, 0.0, 0.0, 0.0};
  const double h = std::sqrt(0.5);
  const Quaternion z90{h, 0.0, 0.0, h};
  EXPECT_NEAR(quat_angle(id, z90), kPi / 2.0, 1e-12);
}

TEST(QuatAngle, SymmetricNonNegativeBounded) {
  SplitMix64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const Quaternion a = quat_from_rotation(random_rotation(rng));
    const Quaternion b = quat_from_rotation(random_rotation(rng));
    const double ab = quat_angle(a, b);
    EXPECT_DOUBLE_EQ(ab, quat_angle(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi);
    EXPECT_NEAR(quat_angle(a.negated(), b), ab, 1e-15);
    EXPECT_NEAR(quat_angle(a, b.negated()), ab, 1e-15);
  }
}

TEST(QuatAngle, MatchesAxisAngleMagnitude) {
  SplitMix64 rng(18);
  const Quaternion id{1.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 200; ++i) {
    const double angle = rng.uniform(0.0, kPi);
    const Rotation3 r = Rotation3::axis_angle(random_unit_vector(rng), angle);
    EXPECT_NEAR(quat_angle(quat_from_rotation(r), id), angle, 1e-9);
  }
}

TEST(QuatAngle, RejectsZeroQuaternion) {
  const Quaternion zero{0.0, 0.0, 0.0, 0.0};
  const Quaternion id{1.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(quat_angle(zero, id), InvariantViolationError);
}

TEST(QuatConvert, IdentityMapsToUnitW) {
  const Quaternion q = quat_from_rotation(Rotation3::identity());
  EXPECT_DOUBLE_EQ(q.w, 1.0);
  EXPECT_DOUBLE_EQ(q.x, 0.0);
  EXPECT_DOUBLE_EQ(q.y, 0.0);
  EXPECT_DOUBLE_EQ(q.z, 0.0);
  const Rotation3 r = rotation_from_quat(Quaternion{1.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(r.matrix(), Eigen::Matrix3d::Identity());
}

TEST(QuatConvert, HalfTurnAboutX) {
  const Rotation3 r = Rotation3::axis_angle(Point3(1, 0, 0), kPi);
  const Quaternion q = quat_from_rotation(r);
  EXPECT_NEAR(q.w, 0.0, 1e-15);
  EXPECT_NEAR(q.x, 1.0, 1e-15);
  EXPECT_NEAR(q.y, 0.0, 1e-15);
  EXPECT_NEAR(q.z, 0.0, 1e-15);
  const Rotation3 back = rotation_from_quat(Quaternion{0.0, 1.0, 0.0, 0.0});
  EXPECT_LT((back.matrix() - r.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QuatConvert, RoundTripsRandomRotations) {
  SplitMix64 rng(19);
  for (int i = 0; i < 1000; ++i) {
    const Rotation3 r = random_rotation(rng);
    const Quaternion q = quat_from_rotation(r);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_GE(q.w, 0.0);
    const Rotation3 back = rotation_from_quat(q);
    EXPECT_LT((back.matrix() - r.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(QuatConvert, CanonicalSignRules) {
  const Quaternion neg_w{-0.5, 0.5, 0.5, 0.5};
  const Quaternion cw = neg_w.canonical();
  EXPECT_DOUBLE_EQ(cw.w, 0.5);
  EXPECT_DOUBLE_EQ(cw.x, -0.5);

  // w == 0: the first nonzero of (x, y, z) decides the sign.
  const Quaternion zx{0.0, -1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(zx.canonical().x, 1.0);
  const Quaternion zy{0.0, 0.0, -1.0, 0.0};
  EXPECT_DOUBLE_EQ(zy.canonical().y, 1.0);
  const Quaternion zz{0.0, 0.0, 0.0, -1.0};
  EXPECT_DOUBLE_EQ(zz.canonical().z, 1.0);
  const Quaternion mixed{0.0, 0.0, -0.6, 0.8};
  const Quaternion cm = mixed.canonical();
  EXPECT_DOUBLE_EQ(cm.y, 0.6);
  EXPECT_DOUBLE_EQ(cm.z, -0.8);
}

TEST(QuatConvert, RejectsNonUnitQuaternion) {
  EXPECT_THROW(rotation_from_quat(Quaternion{2.0, 0.0, 0.0, 0.0}),
               InvariantViolationError);
}

TEST(Rotation3, FromMatrixValidates) {
  EXPECT_NO_THROW(Rotation3::from_matrix(Eigen::Matrix3d::Identity()));

  Eigen::Matrix3d scaled = 2.0 * Eigen::Matrix3d::Identity();
  EXPECT_THROW(Rotation3::from_matrix(scaled), InvariantViolationError);

  // Orthonormal but improper (a reflection): det = -1.
  Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity();
  mirror(2, 2) = -1.0;
  EXPECT_THROW(Rotation3::from_matrix(mirror), InvariantViolationError);

  Eigen::Matrix3d nan = Eigen::Matrix3d::Identity();
  nan(0, 0) = std::nan("");
  EXPECT_THROW(Rotation3::from_matrix(nan), InvariantViolationError);
}

TEST(Rotation3, NearestProjectsBackOntoRotations) {
  SplitMix64 rng(20);
  for (int i = 0; i < 200; ++i) {
    const Rotation3 r = random_rotation(rng);
    Eigen::Matrix3d noisy = r.matrix();
    for (int k = 0; k < 9; ++k) noisy(k / 3, k % 3) += rng.uniform(-1e-4, 1e-4);
    const Rotation3 fixed = Rotation3::nearest(noisy);
    const Eigen::Matrix3d gram = fixed.matrix().transpose() * fixed.matrix();
    EXPECT_LT((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((fixed.matrix() - r.matrix()).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(Rotation3, NearestFlipsReflections) {
  Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity();
  mirror(2, 2) = -1.0;
  const Rotation3 fixed = Rotation3::nearest(mirror);
  EXPECT_NO_THROW(Rotation3::from_matrix(fixed.matrix()));
}

TEST(Rotation3, AxisAngleNormalizesAxis) {
  const Rotation3 a = Rotation3::axis_angle(Point3(0, 0, 1), kPi / 2.0);
  const Rotation3 b = Rotation3::axis_angle(Point3(0, 0, 7.5), kPi / 2.0);
  EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(Rotation3::axis_angle(Point3::Zero(), 1.0), InvariantViolationError);
}

// Property sweep: invert round-trip at 1e-9 * |p|, plus associativity.
TEST(GeometryProperties, InverseRoundTripAndAssociativity) {
  SplitMix64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const SimTransform a = random_transform(rng);
    const SimTransform b = random_transform(rng);
    const SimTransform c = random_transform(rng);
    const Point3 p = random_point(rng, 50.0);

    const Point3 rt = apply_sim3(invert_sim3(a), apply_sim3(a, p));
    EXPECT_LT((rt - p).norm(), 1e-9 * (1.0 + p.norm()));

    const SimTransform left = compose_sim3(compose_sim3(a, b), c);
    const SimTransform right = compose_sim3(a, compose_sim3(b, c));
    EXPECT_LT(testutil::transform_difference(left, right), 1e-9);
  }
}

}  // namespace
}  // namespace pointfuse
