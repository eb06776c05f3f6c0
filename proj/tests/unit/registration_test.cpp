#include <gtest/gtest.h>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "icp_cases.hpp"
#include "radloc/registration.hpp"

namespace radloc {
namespace {

using testing::Gen;

constexpr double kDeg = std::numbers::pi / 180.0;

// Kabsch through an SVD of the cross-covariance.
Pose2 svd_alignment(const std::vector<Point2>& from, const std::vector<Point2>& to) {
  Point2 mf = Point2::Zero();
  Point2 mt = Point2::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    mf += from[i];
    mt += to[i];
  }
  mf /= static_cast<double>(from.size());
  mt /= static_cast<double>(to.size());
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h += (from[i] - mf) * (to[i] - mt).transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  d(1, 1) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix2d r = svd.matrixV() * d * svd.matrixU().transpose();
  const Point2 t = mt - r * mf;
  return {t.x(), t.y(), std::atan2(r(1, 0), r(0, 0))};
}

TEST(AlignPairs, MatchesSvdOracleOnNoisyPairs) {
  Gen gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point2> from;
    std::vector<Point2> to;
    const Pose2 t = gen.pose(10.0);
    const std::size_t n = gen.index(3, 40);
    for (std::size_t i = 0; i < n; ++i) {
      from.emplace_back(gen.uniform(-10, 10), gen.uniform(-10, 10));
      to.push_back(t * from.back() + Point2(gen.normal(0.3), gen.normal(0.3)));
    }
    const Pose2 a = align_pairs(from, to);
    const Pose2 b = svd_alignment(from, to);
    EXPECT_NEAR(a.x(), b.x(), 1e-9);
    EXPECT_NEAR(a.y(), b.y(), 1e-9);
    EXPECT_NEAR(normalize_angle(a.theta() - b.theta()), 0.0, 1e-9);
  }
}

TEST(Icp, ExactRecoveryNoiseFree) {
  Gen gen(32);
  const IcpConfig cfg = testing::exact_icp_config();
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = testing::make_icp_case(gen);
    const IcpResult r = icp(c.source, c.target, Pose2::identity(), cfg);
    ASSERT_TRUE(r.converged) << "trial " << trial;
    EXPECT_LT((r.transform.translation() - c.truth.translation()).norm(), 1e-6) << "trial " << trial;
    EXPECT_LT(std::abs(normalize_angle(r.transform.theta() - c.truth.theta())), 1e-8) << "trial " << trial;
    EXPECT_DOUBLE_EQ(r.fitness, 1.0);
  }
}

TEST(Icp, TwentyPercentOutliersBeyondTrim) {
  Gen gen(33);
  const IcpConfig cfg = testing::exact_icp_config();
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = testing::make_icp_case(gen, 0.2);
    const IcpResult r = icp(c.source, c.target, Pose2::identity(), cfg);
    EXPECT_LT((r.transform.translation() - c.truth.translation()).norm(), 0.05) << "trial " << trial;
    EXPECT_LT(std::abs(normalize_angle(r.transform.theta() - c.truth.theta())), 0.5 * kDeg) << "trial " << trial;
    EXPECT_LT(r.fitness, 1.0);
  }
}

TEST(Icp, TraceCostsNeverIncreaseWithinIteration) {
  Gen gen(34);
  const auto c = testing::make_icp_case(gen, 0.2);
  const IcpResult r = icp(c.source, c.target, Pose2::identity(), testing::exact_icp_config());
  ASSERT_FALSE(r.trace.empty());
  for (const auto& it : r.trace) EXPECT_LE(it.mse_after, it.mse_before + 1e-12);
  EXPECT_EQ(r.trace.front().trim_distance, 8.0);
  EXPECT_EQ(r.trace.back().trim_distance, 4.0);
  EXPECT_EQ(r.iterations_used, r.trace.size());
}

TEST(Icp, FitnessCountsDistinctMatchedTargets) {
  // Three source points share one nearest target; two targets are far away.
  PointCloud2D source;
  source.points = {{0.0, 0.0}, {0.1, 0.0}, {0.0, 0.1}};
  PointCloud2D target;
  target.points = {{0.05, 0.05}, {50.0, 0.0}, {0.0, 50.0}, {-50.0, 0.0}};
  IcpConfig cfg;
  cfg.trim_distance = 1.0;
  cfg.max_iterations = 1;
  const IcpResult r = icp(source, target, Pose2::identity(), cfg);
  EXPECT_EQ(r.inlier_count, 1u);
  EXPECT_EQ(r.target_count, 4u);
  EXPECT_DOUBLE_EQ(r.fitness, 0.25);
}

TEST(Icp, RejectsTinyClouds) {
  PointCloud2D two;
  two.points = {{0, 0}, {1, 0}};
  PointCloud2D three;
  three.points = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(icp(two, three, Pose2(), IcpConfig{}), std::invalid_argument);
  EXPECT_THROW(icp(three, two, Pose2(), IcpConfig{}), std::invalid_argument);
}

TEST(FitnessGate, RequiresConvergenceAndThreshold) {
  IcpResult r;
  r.converged = true;
  r.fitness = 0.6;
  EXPECT_TRUE(fitness_gate(r, 0.6));
  r.fitness = 0.5999;
  EXPECT_FALSE(fitness_gate(r, 0.6));
  r.fitness = 0.9;
  r.converged = false;
  EXPECT_FALSE(fitness_gate(r, 0.6));
}

}  // namespace
}  // namespace radloc
