#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "oracles.hpp"
#include "radloc/se2.hpp"

namespace radloc {
namespace {

using testing::Gen;

constexpr double kPi = std::numbers::pi;

double pose_distance(const Pose2& a, const Pose2& b) {
  return std::max({std::abs(a.x() - b.x()), std::abs(a.y() - b.y()), std::abs(normalize_angle(a.theta() - b.theta()))});
}

TEST(NormalizeAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(-0.5), -0.5, 0.0);
  Gen gen(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = gen.uniform(-100.0, 100.0);
    const double w = normalize_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(a - w, 2.0 * kPi), 0.0, 1e-12);
  }
}

TEST(Pose2, MatrixMatchesCosSinOracle) {
  Gen gen(2);
  for (int i = 0; i < 200; ++i) {
    const Pose2 p = gen.pose();
    EXPECT_TRUE(p.matrix().isApprox(testing::oracle_matrix(p.x(), p.y(), p.theta()), 1e-14));
  }
}

TEST(Pose2, ComposeMatchesMatrixProduct) {
  Gen gen(3);
  for (int i = 0; i < 500; ++i) {
    const Pose2 a = gen.pose();
    const Pose2 b = gen.pose();
    const Matrix3 expected = testing::oracle_matrix(a.x(), a.y(), a.theta()) * testing::oracle_matrix(b.x(), b.y(), b.theta());
    EXPECT_LT((compose(a, b).matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pose2, GroupAxioms) {
  Gen gen(4);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 a = gen.pose();
    const Pose2 b = gen.pose();
    const Pose2 c = gen.pose();
    EXPECT_LT(pose_distance((a * b) * c, a * (b * c)), 1e-12);
    EXPECT_LT(pose_distance(a * Pose2::identity(), a), 1e-12);
    EXPECT_LT(pose_distance(Pose2::identity() * a, a), 1e-12);
    EXPECT_LT(pose_distance(a * inverse(a), Pose2::identity()), 1e-12);
    EXPECT_LT(pose_distance(inverse(a) * a, Pose2::identity()), 1e-12);
    EXPECT_LT(pose_distance(between(a, b), inverse(a) * b), 1e-12);
  }
}

TEST(Pose2, TransformPointMatchesMatrix) {
  Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const Pose2 p = gen.pose();
    const Point2 q(gen.uniform(-20, 20), gen.uniform(-20, 20));
    const Eigen::Vector3d h = p.matrix() * Eigen::Vector3d(q.x(), q.y(), 1.0);
    EXPECT_LT((p * q - h.head<2>()).norm(), 1e-12);
  }
}

TEST(Exp, MatchesSeriesOracle) {
  Gen gen(6);
  for (int i = 0; i < 500; ++i) {
    const Twist2 xi = gen.twist();
    EXPECT_LT((exp(xi).matrix() - testing::series_exp(xi)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ExpLog, RoundTrip) {
  Gen gen(7);
  for (int i = 0; i < 10000; ++i) {
    const Twist2 xi = gen.twist();
    const Twist2 back = log(exp(xi));
    EXPECT_LT((back.vector() - xi.vector()).cwiseAbs().maxCoeff(), 1e-9);
    const Pose2 p = gen.pose();
    EXPECT_LT(pose_distance(exp(log(p)), p), 1e-9);
  }
}

TEST(ExpLog, SmallAngleBranch) {
  for (const double w : {0.0, 1e-12, -1e-9, 1e-6, 1e-4}) {
    const Twist2 xi{1.5, -0.7, w};
    EXPECT_LT((log(exp(xi)).vector() - xi.vector()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((exp(xi).matrix() - testing::series_exp(xi)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ExpLog, HalfTurnMapsToPositivePi) {
  const Twist2 xi = log(Pose2(1.0, 2.0, kPi));
  EXPECT_DOUBLE_EQ(xi.omega, kPi);
  EXPECT_LT(pose_distance(exp(xi), Pose2(1.0, 2.0, kPi)), 1e-12);
  EXPECT_DOUBLE_EQ(log(Pose2(1.0, 2.0, -kPi)).omega, kPi);
}

TEST(Adjoint, ConjugationIdentity) {
  Gen gen(8);
  for (int i = 0; i < 500; ++i) {
    const Pose2 t = gen.pose();
    const Twist2 xi = gen.twist(2.0, 1.0);
    const Pose2 lhs = t * exp(xi) * inverse(t);
    const Pose2 rhs = exp(Twist2::from_vector(adjoint(t) * xi.vector()));
    EXPECT_LT(pose_distance(lhs, rhs), 1e-9);
  }
}

TEST(RightJacobian, MatchesFiniteDifference) {
  Gen gen(9);
  for (int i = 0; i < 200; ++i) {
    const Twist2 xi = gen.twist(5.0, 3.0);
    const Pose2 base = exp(xi);
    const Matrix3 numeric = testing::numeric_jacobian(
        [&](const Vector3& d) { return log(inverse(base) * exp(Twist2::from_vector(xi.vector() + d))).vector(); });
    EXPECT_LT((right_jacobian(xi) - numeric).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((right_jacobian(xi) * right_jacobian_inverse(xi) - Matrix3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

}  // namespace
}  // namespace radloc
