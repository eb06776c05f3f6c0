#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "generators.hpp"
#include "radloc/evaluation.hpp"

namespace radloc {
namespace {

std::vector<TimedPose> wiggly_path(testing::Gen& gen, std::size_t n) {
  std::vector<TimedPose> out;
  Pose2 p = gen.pose(10.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({0.25 * static_cast<double>(i), p});
    p = p * Pose2(gen.uniform(0.5, 2.0), 0.0, gen.normal(0.1));
  }
  return out;
}

TEST(Evaluate, IdenticalTrajectoriesScoreZero) {
  testing::Gen gen(61);
  const auto traj = wiggly_path(gen, 200);
  const TrajectoryErrorReport r = align_and_score(traj, traj);
  EXPECT_EQ(r.errors.size(), traj.size());
  EXPECT_EQ(r.rmse_translation, 0.0);
  EXPECT_EQ(r.rmse_lat, 0.0);
  EXPECT_EQ(r.rmse_long, 0.0);
  EXPECT_EQ(r.rmse_yaw, 0.0);
  EXPECT_EQ(r.skipped, 0u);
}

TEST(Evaluate, ConstantOffsetGivesThatRmse) {
  testing::Gen gen(62);
  const auto truth = wiggly_path(gen, 100);
  auto est = truth;
  for (auto& e : est) e.pose = Pose2(e.pose.x() + 3.0, e.pose.y() - 4.0, e.pose.theta() + 0.1);
  const TrajectoryErrorReport r = align_and_score(est, truth);
  EXPECT_NEAR(r.rmse_translation, 5.0, 1e-9);
  EXPECT_NEAR(r.rmse_long, 3.0, 1e-9);
  EXPECT_NEAR(r.rmse_lat, 4.0, 1e-9);
  EXPECT_NEAR(r.rmse_yaw, 0.1 * 180.0 / std::numbers::pi, 1e-9);
  EXPECT_NEAR(r.errors.front().lon, 3.0, 1e-9);
  EXPECT_NEAR(r.errors.front().lat, -4.0, 1e-9);
}

TEST(Evaluate, RmseMatchesHandComputation) {
  testing::Gen gen(63);
  const auto truth = wiggly_path(gen, 50);
  auto est = truth;
  double sum_sq = 0.0;
  for (auto& e : est) {
    const double dx = gen.normal(0.5);
    const double dy = gen.normal(0.5);
    e.pose = Pose2(e.pose.x() + dx, e.pose.y() + dy, e.pose.theta());
    sum_sq += dx * dx + dy * dy;
  }
  EXPECT_NEAR(align_and_score(est, truth).rmse_translation, std::sqrt(sum_sq / 50.0), 1e-12);
}

TEST(Interpolate, LinearPositionShortestArcYaw) {
  const std::vector<TimedPose> truth{{0.0, Pose2(0.0, 0.0, 3.0)}, {1.0, Pose2(10.0, -2.0, -3.0)}};
  const auto mid = interpolate_pose(truth, 0.5);
  ASSERT_TRUE(mid.has_value());
  EXPECT_NEAR(mid->x(), 5.0, 1e-12);
  EXPECT_NEAR(mid->y(), -1.0, 1e-12);
  EXPECT_NEAR(std::abs(mid->theta()), std::numbers::pi, 1e-9);  // through pi, not through 0
  EXPECT_FALSE(interpolate_pose(truth, 1.01).has_value());
  EXPECT_FALSE(interpolate_pose(truth, -0.01).has_value());
}

TEST(Evaluate, SkipsEstimatesOutsideTruthSpan) {
  const std::vector<TimedPose> truth{{1.0, Pose2()}, {2.0, Pose2(1, 0, 0)}};
  const std::vector<TimedPose> est{{0.5, Pose2()}, {1.5, Pose2(0.5, 0, 0)}, {2.5, Pose2()}};
  const auto r = align_and_score(est, truth);
  EXPECT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.skipped, 2u);
  EXPECT_THROW(align_and_score({{5.0, Pose2()}}, truth), std::invalid_argument);
}

TEST(Histogram, SpansThreeSigmaAndCountsEverything) {
  testing::Gen gen(64);
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(gen.normal(2.0) + 1.0);
  const Histogram h = make_histogram(v, 40);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sigma = std::sqrt(var / static_cast<double>(v.size()));
  EXPECT_NEAR(h.lower, mean - 3.0 * sigma, 1e-9);
  EXPECT_NEAR(h.upper, mean + 3.0 * sigma, 1e-9);
  std::size_t total = h.below + h.above;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, v.size());
  const Histogram flat = make_histogram({2.0, 2.0}, 4);
  EXPECT_DOUBLE_EQ(flat.lower, 1.5);
  EXPECT_DOUBLE_EQ(flat.upper, 2.5);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  testing::Gen gen(65);
  const auto traj = wiggly_path(gen, 30);
  const auto path = std::filesystem::temp_directory_path() / "radloc_eval_roundtrip.csv";
  write_trajectory_csv(path, traj);
  const auto back = read_trajectory_csv(path);
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back[i].timestamp, traj[i].timestamp);
    EXPECT_EQ(back[i].pose.x(), traj[i].pose.x());
    EXPECT_EQ(back[i].pose.y(), traj[i].pose.y());
    EXPECT_EQ(back[i].pose.theta(), traj[i].pose.theta());
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_trajectory_csv(path), std::runtime_error);
}

}  // namespace
}  // namespace radloc
